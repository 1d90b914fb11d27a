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

#include "scbf_mppi/barrier.hpp"

#include <stdexcept>

#include "scbf_mppi/stats.hpp"

namespace scbf_mppi {

double default_alpha(double delta) { return normal_quantile(1.0 - delta); }

SafetyParams make_safety_params(double delta, std::optional<double> alpha, AlphaForm form) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("make_safety_params: delta must lie in (0, 1)");
  }
  SafetyParams p;
  p.delta = delta;
  p.alpha = alpha.value_or(default_alpha(delta));
  if (p.alpha < 0.0) throw std::invalid_argument("make_safety_params: alpha must be >= 0");
  p.alpha_form = form;
  return p;
}

BarrierFunction make_symbolic_barrier(const std::string& name, const sym::Expr& h, int dim) {
  BarrierFunction bf;
  bf.name = name;
  bf.dim = dim;
  bf.expr = h;
  const sym::ExprVector grad = sym::gradient(h, dim);
  const sym::ExprMatrix hess = sym::hessian(h, dim);
  bf.value = [h](const StateVec& x) { return sym::eval(h, x); };
  bf.gradient = [grad, dim](const StateVec& x) {
    Eigen::VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g[i] = sym::eval(grad[i], x);
    return g;
  };
  bf.hessian = [hess, dim](const StateVec& x) {
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = sym::eval(hess[i][j], x);
    return m;
  };
  return bf;
}

bool is_safe(const StateVec& x, const std::vector<BarrierFunction>& barriers) {
  for (const auto& bf : barriers) {
    if (bf.value(x) < 0.0) return false;
  }
  return true;
}

namespace {

// 1/2 Tr(sigma^T H sigma) = 1/2 <H, sigma sigma^T>
double ito_trace_term(const DynamicsModel& model, const BarrierFunction& bf,
                      const StateVec& x) {
  const Eigen::MatrixXd sigma = model.diffusion(x);
  const Eigen::MatrixXd hess = bf.hessian(x);
  return 0.5 * (sigma.transpose() * hess * sigma).trace();
}

}  // namespace

double scbf_margin(const DynamicsModel& model, const BarrierFunction& bf,
                   const StateVec& x, const ControlVec& u) {
  const Eigen::VectorXd grad = bf.gradient(x);
  const double lf = grad.dot(model.drift(x));
  const double lg_u = grad.transpose() * model.input_map(x) * u;
  return lf + lg_u + ito_trace_term(model, bf, x) + bf.value(x);
}

ConstraintCoeffs constraint_coeffs(const DynamicsModel& model, const BarrierFunction& bf,
                                   const StateVec& x) {
  if (x.size() != model.state_dim) {
    throw std::invalid_argument("constraint_coeffs: state dimension mismatch");
  }
  const Eigen::VectorXd grad = bf.gradient(x);
  ConstraintCoeffs c;
  c.A = grad.transpose() * model.input_map(x);
  c.b = -bf.value(x) - grad.dot(model.drift(x)) - ito_trace_term(model, bf, x);
  return c;
}

HighOrderChain high_order_lift(const DynamicsModel& model, const BarrierFunction& bf, int r) {
  if (r < 0) throw std::invalid_argument("high_order_lift: order must be >= 0");
  if (r > 2) throw std::invalid_argument("high_order_lift: orders above 2 are unsupported");
  if (!bf.expr.has_value()) {
    throw std::invalid_argument("high_order_lift: barrier lacks a closed form");
  }
  if (!model.sym_drift.has_value() || !model.sym_diffusion.has_value()) {
    throw std::invalid_argument("high_order_lift: model lacks closed-form drift/diffusion");
  }
  const int n = model.state_dim;
  const sym::ExprVector& f = *model.sym_drift;
  const sym::ExprMatrix& sigma = *model.sym_diffusion;

  // sigma sigma^T, formed once; constant for the shipped models.
  sym::ExprMatrix ssT(n, sym::ExprVector(n, sym::constant(0.0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sym::Expr s = sym::constant(0.0);
      for (int k = 0; k < n; ++k) s = sym::add(s, sym::mul(sigma[i][k], sigma[j][k]));
      ssT[i][j] = s;
    }

  HighOrderChain chain;
  chain.levels.push_back(bf);
  sym::Expr h = *bf.expr;
  for (int level = 1; level <= r; ++level) {
    sym::Expr next = h;
    const sym::ExprVector grad = sym::gradient(h, n);
    for (int i = 0; i < n; ++i) next = sym::add(next, sym::mul(grad[i], f[i]));
    const sym::ExprMatrix hess = sym::hessian(h, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        next = sym::add(next, sym::scale(0.5, sym::mul(hess[i][j], ssT[i][j])));
    h = next;
    chain.levels.push_back(
        make_symbolic_barrier(bf.name + "^" + std::to_string(level), h, n));
  }
  return chain;
}

ConstraintCoeffs high_order_coeffs(const DynamicsModel& model, const HighOrderChain& chain,
                                   const StateVec& x) {
  if (chain.levels.empty()) throw std::invalid_argument("high_order_coeffs: empty chain");
  return constraint_coeffs(model, chain.levels.back(), x);
}

std::vector<BarrierFunction> narrow_passage_barriers(double width, double freq) {
  using sym::constant;
  using sym::sub;
  using sym::var;
  // state (x, y, theta); walls depend on (x, y) only. Closures are written
  // out by hand -- they run inside the sampling loop -- while the symbolic
  // forms stay attached for lifting.
  const sym::Expr wave = sym::sin(sym::scale(freq, var(0)));
  const sym::Expr h1 = sub(var(1), wave);
  const sym::Expr h2 = sub(sym::add(wave, constant(width)), var(1));

  BarrierFunction lower;
  lower.name = "h1";
  lower.dim = 3;
  lower.expr = h1;
  lower.value = [freq](const StateVec& x) { return x[1] - std::sin(freq * x[0]); };
  lower.gradient = [freq](const StateVec& x) {
    Eigen::Vector3d g(-freq * std::cos(freq * x[0]), 1.0, 0.0);
    return Eigen::VectorXd(g);
  };
  lower.hessian = [freq](const StateVec& x) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h(0, 0) = freq * freq * std::sin(freq * x[0]);
    return Eigen::MatrixXd(h);
  };

  BarrierFunction upper;
  upper.name = "h2";
  upper.dim = 3;
  upper.expr = h2;
  upper.value = [freq, width](const StateVec& x) {
    return std::sin(freq * x[0]) + width - x[1];
  };
  upper.gradient = [freq](const StateVec& x) {
    Eigen::Vector3d g(freq * std::cos(freq * x[0]), -1.0, 0.0);
    return Eigen::VectorXd(g);
  };
  upper.hessian = [freq](const StateVec& x) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h(0, 0) = -freq * freq * std::sin(freq * x[0]);
    return Eigen::MatrixXd(h);
  };
  return {lower, upper};
}

std::vector<BarrierFunction> double_integrator_barriers() {
  const sym::Expr h = sym::sub(sym::constant(1.0), sym::var(0));
  return {make_symbolic_barrier("h_di", h, 2)};
}

std::vector<BarrierFunction> barrier_set_by_name(const std::string& name, double width,
                                                 double freq) {
  if (name == "narrow_passage") return narrow_passage_barriers(width, freq);
  if (name == "double_integrator_demo") return double_integrator_barriers();
  throw std::invalid_argument("unknown barrier set: " + name);
}

}  // namespace scbf_mppi
