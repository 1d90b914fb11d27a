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

#include "scbf_mppi/barrier.hpp"
#include "scbf_mppi/cost.hpp"
#include "scbf_mppi/dynamics.hpp"
#include "scbf_mppi/shaper.hpp"

namespace scbf_mppi {

enum class ControlMode { kPlain, kScbf };

struct MppiConfig {
  int samples = 500;   // K
  int horizon = 20;    // T
  double dt = 0.05;
  double temperature = 1.0;        // lambda
  Eigen::VectorXd nominal_sigma;   // per-dimension stddev of du
  ControlMode mode = ControlMode::kPlain;
  std::uint64_t seed = 0;
  // Likelihood-ratio correction for shaped sampling. Off by default: the
  // uncorrected update is deliberately sub-optimal but matches the intended
  // algorithm; the ratio is available for experiments.
  bool importance_ratio = false;
  // One shaping solve per timestep on the noise-free nominal trajectory
  // instead of one per (sample, timestep).
  bool shared_shaping = false;
  double shaper_tolerance = 1e-8;
  int workers = 0;  // 0 => hardware concurrency
};

struct ControlSchedule {
  std::vector<ControlVec> inputs;
};

struct RolloutBatch {
  std::vector<Trajectory> trajectories;
  std::vector<double> costs;                        // S(tau_i)
  std::vector<std::vector<bool>> shaped_flags;      // K x T
  std::vector<std::vector<bool>> infeasible_flags;  // K x T
  std::vector<long> theorem3_counts;                // per sample
};

struct WeightVector {
  Eigen::VectorXd weights;  // nonnegative, sums to 1
};

struct StepDiagnostics {
  double baseline_cost = 0.0;   // beta = min_i S(tau_i)
  double weight_entropy = 0.0;  // -sum w log w
  long shaped_count = 0;
  long infeasible_count = 0;
  long theorem3_flags = 0;  // lifted chains: intermediate-level A g < 0 events
  Eigen::VectorXd perturbation_variance;  // per dim, over all K*T draws
  double e1_hat = 0.0;                    // mean exp(-(S - beta)/lambda)
};

/// Softmax weights with baseline subtraction:
/// w_i proportional to exp(-(S_i - min_j S_j)/lambda), normalized to sum 1.
WeightVector compute_weights(std::span<const double> costs, double lambda);

/// u_t <- u_t + sum_i w_i du_{i,t}.
ControlSchedule update_schedule(const ControlSchedule& schedule, const RolloutBatch& batch,
                                const WeightVector& weights);

/// Drops u_0, shifts left, appends u_init.
ControlSchedule shift_horizon(const ControlSchedule& schedule, const ControlVec& u_init);

struct PerturbationResult {
  ControlVec du;
  GaussianDist used;
  bool shaped = false;
  bool infeasible = false;
};

/// Draws one control perturbation. Plain mode samples the nominal
/// distribution; SCBF mode first shapes it against the constraints. When
/// shaping is infeasible the fallback is a zero-covariance draw at the
/// minimal-norm feasible mean, or the nominal distribution (flagged) when no
/// feasible mean exists.
PerturbationResult sample_perturbation(ControlMode mode, const GaussianDist& nominal,
                                       const std::vector<ConstraintCoeffs>& constraints,
                                       const SafetyParams& params, double shaper_tolerance,
                                       NoiseStream& stream);

class MppiController {
 public:
  /// lift_order > 0 replaces each barrier's constraint with the coefficients
  /// of its lifted chain of that order (relative degree > 1 systems).
  MppiController(DynamicsModel model, CostSpec cost, std::vector<BarrierFunction> barriers,
                 SafetyParams safety, MppiConfig config, int lift_order = 0);

  /// One receding-horizon step from the measured state: batch rollout,
  /// weighting, schedule update, horizon shift. Returns the input to execute.
  ControlVec step(const StateVec& x);

  /// The sampling/rollout stage of `step`, exposed for analysis. Pure given
  /// (config, schedule, x0, iteration).
  RolloutBatch evaluate_batch(const StateVec& x0, std::uint64_t iteration) const;

  const ControlSchedule& schedule() const { return schedule_; }
  const StepDiagnostics& last_diagnostics() const { return diagnostics_; }
  const RolloutBatch& last_batch() const { return last_batch_; }
  const MppiConfig& config() const { return config_; }
  const DynamicsModel& model() const { return model_; }

  void reset();

 private:
  std::vector<GaussianDist> shared_distributions(const StateVec& x0) const;

  DynamicsModel model_;
  CostSpec cost_;
  std::vector<BarrierFunction> barriers_;  // base barriers (safety indicator)
  std::vector<HighOrderChain> chains_;     // one per barrier, possibly lifted
  SafetyParams safety_;
  MppiConfig config_;
  GaussianDist nominal_;
  ControlSchedule schedule_;
  std::uint64_t iteration_ = 0;
  StepDiagnostics diagnostics_;
  RolloutBatch last_batch_;
};

}  // namespace scbf_mppi
