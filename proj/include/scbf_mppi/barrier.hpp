// Copyright 2026 The scbf-mppi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scbf_mppi/dynamics.hpp"
#include "scbf_mppi/symbolic.hpp"

namespace scbf_mppi {

/// Scalar barrier h with exact gradient and Hessian closures. The safe set is
/// {x : h(x) >= 0}. Barriers built from a symbolic expression keep it around
/// so they can be lifted through the dynamics.
struct BarrierFunction {
  std::string name;
  int dim = 0;
  std::function<double(const StateVec&)> value;
  std::function<Eigen::VectorXd(const StateVec&)> gradient;
  std::function<Eigen::MatrixXd(const StateVec&)> hessian;
  std::optional<sym::Expr> expr;
};

/// Linear chance-constraint data: the sampled input must satisfy A u >= b.
struct ConstraintCoeffs {
  Eigen::RowVectorXd A;
  double b = 0.0;
};

enum class AlphaForm {
  kVariance,  // A mu - alpha * A Sigma A^T >= b
  kStdDev,    // A mu - alpha * sqrt(A Sigma A^T) >= b
};

struct SafetyParams {
  double delta = 0.003;          // allowed violation probability
  double alpha = 0.0;            // confidence multiplier; see default_alpha
  AlphaForm alpha_form = AlphaForm::kVariance;
};

/// One-sided standard normal quantile of 1 - delta.
double default_alpha(double delta);

SafetyParams make_safety_params(double delta = 0.003,
                                std::optional<double> alpha = std::nullopt,
                                AlphaForm form = AlphaForm::kVariance);

/// Lifted barrier chain h^0 .. h^r; levels[0] is the base barrier.
struct HighOrderChain {
  std::vector<BarrierFunction> levels;
};

/// Compiles value/gradient/Hessian closures from a symbolic expression.
BarrierFunction make_symbolic_barrier(const std::string& name, const sym::Expr& h, int dim);

/// True iff h(x) >= 0 for every barrier (boundary counts as safe).
bool is_safe(const StateVec& x, const std::vector<BarrierFunction>& barriers);

/// L_f h + L_g h u + 1/2 Tr(sigma^T H sigma) + h(x). Nonnegative iff the
/// barrier condition holds at (x, u).
double scbf_margin(const DynamicsModel& model, const BarrierFunction& bf,
                   const StateVec& x, const ControlVec& u);

/// Coefficients of the induced linear constraint on the control:
/// A = grad(x)^T g(x), b = -h - grad^T f - 1/2 Tr(sigma^T H sigma),
/// so that scbf_margin(x, u) == A u - b.
ConstraintCoeffs constraint_coeffs(const DynamicsModel& model, const BarrierFunction& bf,
                                   const StateVec& x);

/// Applies the recursion h^{r+1} = (dh^r/dx) f + 1/2 Tr(sigma^T (d2h^r/dx2) sigma) + h^r
/// to produce the chain h^0..h^r. Requires symbolic forms on both the barrier
/// and the model; orders above 2 are rejected (std::invalid_argument).
HighOrderChain high_order_lift(const DynamicsModel& model, const BarrierFunction& bf, int r);

/// constraint_coeffs applied to the top level of the chain.
ConstraintCoeffs high_order_coeffs(const DynamicsModel& model, const HighOrderChain& chain,
                                   const StateVec& x);

/// Narrow-passage wall pair h1 = y - sin(freq x), h2 = sin(freq x) + width - y
/// for the planar unicycle state (x, y, theta).
std::vector<BarrierFunction> narrow_passage_barriers(double width = 1.0, double freq = 1.0);

/// h = 1 - x on the double-integrator state (x, v); relative degree 2.
std::vector<BarrierFunction> double_integrator_barriers();

/// Builds a named barrier set ("narrow_passage" or "double_integrator_demo").
std::vector<BarrierFunction> barrier_set_by_name(const std::string& name, double width,
                                                 double freq);

}  // namespace scbf_mppi
