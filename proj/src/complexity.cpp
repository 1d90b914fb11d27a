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

#include "scbf_mppi/complexity.hpp"

#include <cmath>
#include <stdexcept>

#include "scbf_mppi/stats.hpp"

namespace scbf_mppi {

std::int64_t n1_bound(double eps1, double rho1) {
  if (eps1 <= 0.0) throw std::invalid_argument("n1_bound: eps1 must be > 0");
  if (!(rho1 > 0.0 && rho1 <= 2.0)) {
    throw std::invalid_argument("n1_bound: rho1 must lie in (0, 2]");
  }
  const double raw = -std::log(rho1 / 2.0) / (eps1 * eps1);
  return static_cast<std::int64_t>(std::ceil(std::max(0.0, raw)));
}

std::int64_t n2_bound(double eps1, double eps2, double rho2, double var_du,
                      double e1_hat) {
  if (eps2 <= 0.0 || rho2 <= 0.0) {
    throw std::invalid_argument("n2_bound: eps2 and rho2 must be > 0");
  }
  if (var_du < 0.0) throw std::invalid_argument("n2_bound: variance must be >= 0");
  if (e1_hat - eps1 <= 0.0) {
    throw std::domain_error("n2_bound: e1_hat must exceed eps1");
  }
  const double denom = e1_hat - eps1;
  const double raw = 4.0 * var_du / (rho2 * eps2 * eps2) / (denom * denom);
  return static_cast<std::int64_t>(std::ceil(raw));
}

double estimate_e1(std::span<const double> costs, double lambda) {
  if (costs.empty()) throw std::invalid_argument("estimate_e1: empty batch");
  if (lambda <= 0.0) throw std::invalid_argument("estimate_e1: lambda must be > 0");
  double s = 0.0;
  for (double c : costs) s += std::exp(-c / lambda);
  return s / static_cast<double>(costs.size());
}

Eigen::VectorXd estimate_var_du(const std::vector<Eigen::VectorXd>& perturbations) {
  if (perturbations.size() < 2) {
    throw std::invalid_argument("estimate_var_du: need at least two draws");
  }
  const int m = static_cast<int>(perturbations.front().size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (const auto& p : perturbations) mean += p;
  mean /= static_cast<double>(perturbations.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
  for (const auto& p : perturbations) var += (p - mean).cwiseAbs2();
  var /= static_cast<double>(perturbations.size() - 1);
  return var;
}

bool lemma1_check(std::span<const double> x_samples, std::span<const double> y_samples) {
  if (x_samples.size() != y_samples.size() || x_samples.size() < 2) {
    throw std::invalid_argument("lemma1_check: need paired samples, n >= 2");
  }
  const std::size_t n = x_samples.size();
  std::vector<double> xy(n);
  for (std::size_t i = 0; i < n; ++i) xy[i] = x_samples[i] * y_samples[i];

  const double var_xy = sample_variance(xy);
  const double var_x = sample_variance(x_samples);
  const double var_y = sample_variance(y_samples);
  const double mean_x = sample_mean(x_samples);
  const double rhs = 2.0 * var_x * var_y + 2.0 * var_y * mean_x * mean_x;

  // 3-sigma slack of the product-moment estimator:
  // Var[s^2] ~= (m4 - s^4) / n with m4 the fourth central moment.
  const double mean_xy = sample_mean(xy);
  double m4 = 0.0;
  for (double v : xy) {
    const double dev = v - mean_xy;
    m4 += dev * dev * dev * dev;
  }
  m4 /= static_cast<double>(n);
  const double slack = 3.0 * std::sqrt(std::max(0.0, m4 - var_xy * var_xy) /
                                       static_cast<double>(n));
  return var_xy <= rhs + slack;
}

ComplexityReport make_complexity_report(const ComplexityInputs& inputs,
                                        const EmpiricalStats& stats) {
  ComplexityReport report;
  report.inputs = inputs;
  report.stats = stats;
  report.n1 = n1_bound(inputs.eps1, inputs.rho1);
  // Multidimensional perturbations: bound each dimension, keep the maximum.
  std::int64_t n2 = 0;
  std::int64_t n2_opt = 0;
  for (int i = 0; i < stats.var_du.size(); ++i) {
    n2 = std::max(n2, n2_bound(inputs.eps1, inputs.eps2, inputs.rho2, stats.var_du[i],
                               stats.e1_hat));
    const double denom = stats.e1_hat + inputs.eps1;
    const double raw = 4.0 * stats.var_du[i] / (inputs.rho2 * inputs.eps2 * inputs.eps2) /
                       (denom * denom);
    n2_opt = std::max(n2_opt, static_cast<std::int64_t>(std::ceil(raw)));
  }
  report.n2 = n2;
  report.n2_optimistic = n2_opt;
  report.n = std::max(report.n1, report.n2);
  return report;
}

}  // namespace scbf_mppi
