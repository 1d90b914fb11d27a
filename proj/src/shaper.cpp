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

#include "scbf_mppi/shaper.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace scbf_mppi {

namespace {

constexpr double kTinyCoeff = 1e-14;
constexpr double kEigTol = 1e-9;

double constraint_margin(const Eigen::RowVectorXd& A, double b, const Eigen::VectorXd& mu,
                         const Eigen::MatrixXd& sigma, const SafetyParams& params) {
  const double direction_var = A * sigma * A.transpose();
  const double reduction = params.alpha_form == AlphaForm::kVariance
                               ? params.alpha * direction_var
                               : params.alpha * std::sqrt(std::max(0.0, direction_var));
  return A.dot(mu) - reduction - b;
}

}  // namespace

GaussianDist make_diagonal_gaussian(const Eigen::VectorXd& mean,
                                    const Eigen::VectorXd& stddev) {
  if (mean.size() != stddev.size()) {
    throw std::invalid_argument("make_diagonal_gaussian: dimension mismatch");
  }
  GaussianDist d;
  d.mean = mean;
  d.factor = stddev.asDiagonal();
  return d;
}

bool constraint_satisfied(const GaussianDist& dist, const ConstraintCoeffs& c,
                          const SafetyParams& params) {
  return constraint_margin(c.A, c.b, dist.mean, dist.covariance(), params) >= 0.0;
}

bool lmi_feasible(const GaussianDist& dist, const ConstraintCoeffs& c,
                  const SafetyParams& params) {
  const int m = static_cast<int>(dist.mean.size());
  const Eigen::RowVectorXd ap = c.A * dist.factor;
  Eigen::MatrixXd block(m + 1, m + 1);
  block.setZero();
  block.topLeftCorner(m, m).setIdentity();
  const double root_alpha = std::sqrt(params.alpha);
  block.block(m, 0, 1, m) = root_alpha * ap;
  block.block(0, m, m, 1) = root_alpha * ap.transpose();
  block(m, m) = c.A.dot(dist.mean) - c.b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -kEigTol;
}

std::optional<double> variance_cap(const ConstraintCoeffs& c, const Eigen::VectorXd& mean,
                                   const SafetyParams& params) {
  if (params.alpha <= 0.0) throw std::invalid_argument("variance_cap: alpha must be > 0");
  const double cap = (c.A.dot(mean) - c.b) / params.alpha;
  if (cap < 0.0) return std::nullopt;
  return cap;
}

namespace {

// Per-sweep exact minimization over the (mu_j, d_j) pair with all other
// coordinates held fixed. The feasible mu_j interval [lower(d), upper(d)]
// narrows monotonically as d grows, so the block value function
//   v(d) = |clamp(mu0_j, lower(d), upper(d)) - mu0_j| + sqrt(K + (d - d0_j)^2)
// is convex on the feasible d range.
struct BlockSolver {
  const std::vector<ConstraintCoeffs>& constraints;
  const SafetyParams& params;
  Eigen::VectorXd& mu;
  Eigen::VectorXd& d;
  int j;

  // residual pieces excluding coordinate j, refreshed before each block solve
  std::vector<double> lin_other, var_other;

  void refresh() {
    lin_other.assign(constraints.size(), 0.0);
    var_other.assign(constraints.size(), 0.0);
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      for (int k = 0; k < mu.size(); ++k) {
        if (k == j) continue;
        lin_other[i] += constraints[i].A[k] * mu[k];
        var_other[i] += constraints[i].A[k] * constraints[i].A[k] * d[k] * d[k];
      }
    }
  }

  // required value of A_ij * mu_j at candidate d_j
  double required(std::size_t i, double dj) const {
    const auto& c = constraints[i];
    const double aj = c.A[j];
    const double dir_var = aj * aj * dj * dj + var_other[i];
    const double reduction = params.alpha_form == AlphaForm::kVariance
                                 ? params.alpha * dir_var
                                 : params.alpha * std::sqrt(std::max(0.0, dir_var));
    return c.b - lin_other[i] + reduction;
  }

  void bounds(double dj, double& lower, double& upper) const {
    lower = -std::numeric_limits<double>::infinity();
    upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const double aj = constraints[i].A[j];
      if (std::abs(aj) <= kTinyCoeff) continue;
      const double s = required(i, dj);
      if (aj > 0.0) {
        lower = std::max(lower, s / aj);
      } else {
        upper = std::min(upper, s / aj);
      }
    }
  }

  double value(double dj, double mu0j, double d0j, double k_other) const {
    double lower, upper;
    bounds(dj, lower, upper);
    if (lower > upper) return std::numeric_limits<double>::infinity();
    const double mj = std::clamp(mu0j, lower, upper);
    return std::abs(mj - mu0j) + std::sqrt(k_other + (dj - d0j) * (dj - d0j));
  }

  // Largest feasible d_j in [0, cap]; negative when even d_j = 0 fails.
  double feasible_upper(double cap) const {
    double lo_l, lo_u;
    bounds(0.0, lo_l, lo_u);
    if (lo_l > lo_u) return -1.0;
    double hi_l, hi_u;
    bounds(cap, hi_l, hi_u);
    if (hi_l <= hi_u) return cap;
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      double l, u;
      bounds(mid, l, u);
      (l <= u ? lo : hi) = mid;
    }
    return lo;
  }

  bool solve(const Eigen::VectorXd& mu0, const Eigen::VectorXd& d0) {
    bool involved = false;
    for (const auto& c : constraints) {
      if (std::abs(c.A[j]) > kTinyCoeff) {
        involved = true;
        break;
      }
    }
    if (!involved) {
      // no constraint touches this coordinate pair: nominal is optimal
      mu[j] = mu0[j];
      d[j] = d0[j];
      return true;
    }
    refresh();
    const double mu0j = mu0[j];
    const double d0j = d0[j];
    double k_other = 0.0;
    for (int k = 0; k < d.size(); ++k) {
      if (k != j) k_other += (d[k] - d0[k]) * (d[k] - d0[k]);
    }
    const double d_cap = d0j;  // enlarging the factor never helps
    const double d_max = feasible_upper(d_cap);
    if (d_max < 0.0) {
      // The block alone cannot reach feasibility; park at the least-violating
      // point and let the remaining blocks (or the infeasible status) act.
      double lower, upper;
      bounds(0.0, lower, upper);
      d[j] = 0.0;
      if (std::isfinite(lower) && std::isfinite(upper)) {
        mu[j] = 0.5 * (lower + upper);
      } else if (std::isfinite(lower)) {
        mu[j] = lower;
      } else if (std::isfinite(upper)) {
        mu[j] = upper;
      }
      return false;
    }

    // golden-section on the convex block value
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.0, b = d_max;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = value(x1, mu0j, d0j, k_other), f2 = value(x2, mu0j, d0j, k_other);
    for (int it = 0; it < 80; ++it) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = value(x1, mu0j, d0j, k_other);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = value(x2, mu0j, d0j, k_other);
      }
    }
    double d_best = 0.5 * (a + b);
    double v_best = value(d_best, mu0j, d0j, k_other);
    {
      const double vmax = value(d_max, mu0j, d0j, k_other);
      if (vmax <= v_best) {
        d_best = d_max;
        v_best = vmax;
      }
      const double v0 = value(0.0, mu0j, d0j, k_other);
      if (v0 < v_best) {
        d_best = 0.0;
        v_best = v0;
      }
    }

    // Tie-break toward the covariance: when the objective has a genuinely
    // flat segment (shifting the mean and shrinking the factor cost the
    // same), pick the smallest d_j on it. Probe a macroscopic step to the
    // left so sqrt rounding plateaus do not count as ties.
    const double probe = std::max(1e-6, 1e-6 * d0j);
    if (d_best > probe &&
        value(d_best - probe, mu0j, d0j, k_other) <= v_best + 1e-15 * (1.0 + v_best)) {
      double lo = 0.0, hi = d_best - probe;
      if (value(0.0, mu0j, d0j, k_other) <= v_best) {
        hi = 0.0;
      } else {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (value(mid, mu0j, d0j, k_other) <= v_best ? hi : lo) = mid;
        }
      }
      d_best = hi;
    }
    // Snap to the nominal entry when the optimum sits at it; the coordinate
    // is then exactly untouched. Likewise collapse rounding dust at zero.
    if (std::abs(d_best - d0j) < 1e-9 * std::max(1.0, d0j) && d0j <= d_max) {
      d_best = d0j;
    } else if (d_best < 1e-12 * std::max(1.0, d0j)) {
      d_best = 0.0;
    }
    d[j] = d_best;
    double lower, upper;
    bounds(d_best, lower, upper);
    mu[j] = std::clamp(mu0j, lower, upper);
    return true;
  }
};

double shaped_objective(const Eigen::VectorXd& mu, const Eigen::VectorXd& d,
                        const Eigen::VectorXd& mu0, const Eigen::VectorXd& d0) {
  return (mu - mu0).lpNorm<1>() + (d - d0).norm();
}

}  // namespace

ShaperSolution shape(const ShaperProblem& problem) {
  const int m = static_cast<int>(problem.nominal.mean.size());
  if (problem.constraints.empty()) {
    throw std::invalid_argument("shape: at least one constraint required");
  }
  if (problem.tolerance <= 0.0) throw std::invalid_argument("shape: tolerance must be > 0");
  if (problem.nominal.factor.rows() != m || problem.nominal.factor.cols() != m) {
    throw std::invalid_argument("shape: factor must be m x m");
  }
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      if (r != c && std::abs(problem.nominal.factor(r, c)) > 1e-12) {
        throw std::invalid_argument("shape: nominal factor must be diagonal");
      }
    }
    if (problem.nominal.factor(r, r) < 0.0) {
      throw std::invalid_argument("shape: nominal factor entries must be nonnegative");
    }
  }

  ShaperSolution sol;
  sol.shaped = problem.nominal;

  bool all_ok = true;
  for (const auto& c : problem.constraints) {
    if (static_cast<int>(c.A.size()) != m) {
      throw std::invalid_argument("shape: constraint dimension mismatch");
    }
    if (!constraint_satisfied(problem.nominal, c, problem.params)) all_ok = false;
  }
  if (all_ok) {
    sol.status = ShapeStatus::kUnchanged;
    sol.objective = 0.0;
    return sol;
  }

  // Constraints that no decision variable can influence decide feasibility
  // outright.
  for (const auto& c : problem.constraints) {
    if (c.A.lpNorm<Eigen::Infinity>() <= kTinyCoeff && c.b > 0.0) {
      sol.status = ShapeStatus::kInfeasible;
      return sol;
    }
  }

  const Eigen::VectorXd mu0 = problem.nominal.mean;
  const Eigen::VectorXd d0 = problem.nominal.factor.diagonal();
  Eigen::VectorXd mu = mu0;
  Eigen::VectorXd d = d0;

  // Solve against constraints tightened by a deterministic float headroom:
  // the returned point then satisfies the original inequalities strictly, so
  // boundary rounding cannot flip downstream feasibility checks or sampling
  // guarantees. The objective perturbation is O(1e-11).
  std::vector<ConstraintCoeffs> tightened = problem.constraints;
  for (auto& c : tightened) c.b += 1e-11 * (1.0 + std::abs(c.b));

  double prev_obj = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < 10000; ++sweep) {
    for (int j = 0; j < m; ++j) {
      BlockSolver block{tightened, problem.params, mu, d, j};
      block.solve(mu0, d0);
    }
    const double obj = shaped_objective(mu, d, mu0, d0);
    if (prev_obj - obj < problem.tolerance && sweep > 0) break;
    prev_obj = obj;
  }

  GaussianDist shaped = make_diagonal_gaussian(mu, d);

  double worst = 0.0;
  for (const auto& c : problem.constraints) {
    worst = std::min(worst, constraint_margin(c.A, c.b, shaped.mean, shaped.covariance(),
                                              problem.params));
  }
  if (worst < -problem.tolerance) {
    sol.status = ShapeStatus::kInfeasible;
    sol.shaped = problem.nominal;
    return sol;
  }

  sol.status = ShapeStatus::kShaped;
  sol.shaped = shaped;
  sol.objective = shaped_objective(shaped.mean, shaped.factor.diagonal(), mu0, d0);
  return sol;
}

double chance_violation_rate(const GaussianDist& dist, const ConstraintCoeffs& c,
                             long n, NoiseStream& rng) {
  if (n < 1) throw std::invalid_argument("chance_violation_rate: need n >= 1");
  const int m = static_cast<int>(dist.mean.size());
  long violations = 0;
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd u = dist.mean + dist.factor * rng.normal_vector(m);
    if (c.A.dot(u) < c.b) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(n);
}

std::optional<Eigen::VectorXd> minimal_norm_feasible_mean(
    const std::vector<ConstraintCoeffs>& constraints, int dim) {
  // Dykstra's algorithm over the halfspace intersection, started from the origin.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  std::vector<Eigen::VectorXd> corrections(constraints.size(),
                                           Eigen::VectorXd::Zero(dim));
  for (int it = 0; it < 256; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const Eigen::VectorXd y = x + corrections[i];
      const auto& c = constraints[i];
      const double nrm2 = c.A.squaredNorm();
      Eigen::VectorXd projected = y;
      if (nrm2 > kTinyCoeff) {
        const double viol = c.b - c.A.dot(y);
        if (viol > 0.0) projected = y + c.A.transpose() * (viol / nrm2);
      } else if (c.b > 0.0) {
        return std::nullopt;
      }
      corrections[i] = y - projected;
      change += (projected - x).norm();
      x = projected;
    }
    if (change < 1e-13) break;
  }
  for (const auto& c : constraints) {
    if (c.A.dot(x) < c.b - 1e-9) return std::nullopt;
  }
  return x;
}

}  // namespace scbf_mppi
