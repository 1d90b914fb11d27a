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

#include <optional>
#include <vector>

#include "scbf_mppi/barrier.hpp"
#include "scbf_mppi/rng.hpp"

namespace scbf_mppi {

/// Gaussian sampling distribution stored through its covariance factor:
/// Sigma = factor * factor^T, so positive semidefiniteness holds by
/// construction.
struct GaussianDist {
  Eigen::VectorXd mean;
  Eigen::MatrixXd factor;  // P

  Eigen::MatrixXd covariance() const { return factor * factor.transpose(); }
};

GaussianDist make_diagonal_gaussian(const Eigen::VectorXd& mean,
                                    const Eigen::VectorXd& stddev);

/// Find the Gaussian nearest to `nominal` (l1 on the mean, Frobenius on the
/// factor) whose samples satisfy every chance constraint. The factor is
/// restricted to diagonal with nonnegative entries and the nominal factor
/// must be diagonal.
struct ShaperProblem {
  GaussianDist nominal;
  std::vector<ConstraintCoeffs> constraints;
  SafetyParams params;
  double tolerance = 1e-8;
};

enum class ShapeStatus { kUnchanged, kShaped, kInfeasible };

struct ShaperSolution {
  GaussianDist shaped;
  double objective = 0.0;  // ||mu - mu0||_1 + ||P - P0||_F
  ShapeStatus status = ShapeStatus::kUnchanged;
};

/// Deterministic check of the chance constraint in the configured form:
///   variance: A mu - alpha * A Sigma A^T >= b
///   std-dev:  A mu - alpha * sqrt(A Sigma A^T) >= b
bool constraint_satisfied(const GaussianDist& dist, const ConstraintCoeffs& c,
                          const SafetyParams& params);

/// Positive semidefiniteness of the (m+1)x(m+1) block
///   [ I            sqrt(alpha) (A P)^T ]
///   [ sqrt(alpha) A P       A mu - b   ]
/// (minimum eigenvalue >= -1e-9); equivalent to the variance-form scalar
/// inequality by the Schur complement.
bool lmi_feasible(const GaussianDist& dist, const ConstraintCoeffs& c,
                  const SafetyParams& params);

/// Largest admissible value of A Sigma A^T given the mean: (A mu - b)/alpha.
/// Empty when the mean alone violates the constraint. Requires alpha > 0.
std::optional<double> variance_cap(const ConstraintCoeffs& c, const Eigen::VectorXd& mean,
                                   const SafetyParams& params);

ShaperSolution shape(const ShaperProblem& problem);

/// Monte Carlo estimate of Pr(A u < b) for u ~ N(mean, factor factor^T).
double chance_violation_rate(const GaussianDist& dist, const ConstraintCoeffs& c,
                             long n, NoiseStream& rng);

/// Minimal-norm mean with A_i mu >= b_i for all i (Dykstra's alternating
/// projections). Used as the fallback when shaping is infeasible: the caller
/// pairs it with a zero factor. Empty when no such mean is found.
std::optional<Eigen::VectorXd> minimal_norm_feasible_mean(
    const std::vector<ConstraintCoeffs>& constraints, int dim);

}  // namespace scbf_mppi
