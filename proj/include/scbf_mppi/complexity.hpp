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

#include <cstdint>
#include <span>
#include <vector>

namespace scbf_mppi {

struct ComplexityInputs {
  double eps1 = 0.05;
  double eps2 = 0.1;
  double rho1 = 0.05;
  double rho2 = 0.1;
  double temperature = 1.0;
};

struct EmpiricalStats {
  double e1_hat = 0.0;            // mean of exp(-S/lambda)
  Eigen::VectorXd var_du;         // per-dimension variance of sampled du
  std::int64_t n_used = 0;
};

struct ComplexityReport {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t n = 0;  // max(n1, n2)
  std::int64_t n2_optimistic = 0;  // diagnostic: (e1_hat + eps1) in the denominator
  ComplexityInputs inputs;
  EmpiricalStats stats;
};

/// Hoeffding sample bound: ceil(-(1/eps1^2) log(rho1/2)), floored at 0.
std::int64_t n1_bound(double eps1, double rho1);

/// Chebyshev sample bound: ceil(4 var_du / (rho2 eps2^2) (1/(e1_hat - eps1))^2).
/// Throws std::domain_error when e1_hat <= eps1 (the bound is vacuous there).
std::int64_t n2_bound(double eps1, double eps2, double rho2, double var_du, double e1_hat);

/// Mean of exp(-S/lambda) over a batch of trajectory costs.
double estimate_e1(std::span<const double> costs, double lambda);

/// Unbiased per-dimension sample variance of perturbation draws.
Eigen::VectorXd estimate_var_du(const std::vector<Eigen::VectorXd>& perturbations);

/// Empirical validation of the product-variance bound
/// Var[XY] <= 2 Var[X] Var[Y] + 2 Var[Y] E[X]^2 for paired samples of
/// independent X, Y, with three-sigma slack on the left-hand estimator.
bool lemma1_check(std::span<const double> x_samples, std::span<const double> y_samples);

ComplexityReport make_complexity_report(const ComplexityInputs& inputs,
                                        const EmpiricalStats& stats);

}  // namespace scbf_mppi
