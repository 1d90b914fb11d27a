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

#include <cmath>
#include <functional>

#include "scbf_mppi/barrier.hpp"

// Central-difference derivative checks. Validation only; the control loop
// always uses the analytic closures.

namespace scbf_mppi {

inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = xi - h;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = xi;
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

inline bool gradient_consistent(const BarrierFunction& bf, const Eigen::VectorXd& x,
                                double rel_tol) {
  const Eigen::VectorXd analytic = bf.gradient(x);
  const Eigen::VectorXd fd = finite_difference_gradient(bf.value, x);
  const double scale = std::max(1.0, analytic.norm());
  return (analytic - fd).norm() <= rel_tol * scale;
}

inline bool hessian_consistent(const BarrierFunction& bf, const Eigen::VectorXd& x,
                               double rel_tol) {
  const Eigen::MatrixXd analytic = bf.hessian(x);
  const Eigen::MatrixXd fd = finite_difference_jacobian(bf.gradient, x);
  const double scale = std::max(1.0, analytic.norm());
  return (analytic - fd).norm() <= rel_tol * scale;
}

}  // namespace scbf_mppi
