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

#include "scbf_mppi/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "scbf_mppi/complexity.hpp"

namespace scbf_mppi {

namespace {

constexpr std::uint64_t kBatchTag = 0x6261746368ULL;  // rollout noise domain

double log_density_diag(const ControlVec& x, const GaussianDist& dist) {
  double lp = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    const double sd = std::max(dist.factor(j, j), 1e-12);
    const double z = (x[j] - dist.mean[j]) / sd;
    lp += -0.5 * z * z - std::log(sd);
  }
  return lp;  // common -m/2 log(2 pi) cancels in ratios
}

}  // namespace

WeightVector compute_weights(std::span<const double> costs, double lambda) {
  if (costs.empty()) throw std::invalid_argument("compute_weights: empty costs");
  if (lambda <= 0.0) throw std::invalid_argument("compute_weights: lambda must be > 0");
  const double beta = *std::min_element(costs.begin(), costs.end());
  WeightVector w;
  w.weights.resize(static_cast<int>(costs.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double e = std::exp(-(costs[i] - beta) / lambda);
    w.weights[static_cast<int>(i)] = e;
    total += e;
  }
  w.weights /= total;
  return w;
}

ControlSchedule update_schedule(const ControlSchedule& schedule, const RolloutBatch& batch,
                                const WeightVector& weights) {
  const std::size_t horizon = schedule.inputs.size();
  ControlSchedule updated = schedule;
  for (std::size_t t = 0; t < horizon; ++t) {
    ControlVec delta = ControlVec::Zero(schedule.inputs[t].size());
    for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
      delta += weights.weights[static_cast<int>(i)] *
               batch.trajectories[i].perturbations[t];
    }
    updated.inputs[t] += delta;
  }
  return updated;
}

ControlSchedule shift_horizon(const ControlSchedule& schedule, const ControlVec& u_init) {
  if (schedule.inputs.empty()) throw std::invalid_argument("shift_horizon: empty schedule");
  ControlSchedule shifted;
  shifted.inputs.assign(schedule.inputs.begin() + 1, schedule.inputs.end());
  shifted.inputs.push_back(u_init);
  return shifted;
}

namespace {

// Allocation-free margin for a diagonal-covariance distribution.
double diagonal_nominal_margin(const ConstraintCoeffs& c, const Eigen::VectorXd& mean,
                               const Eigen::VectorXd& variance,
                               const SafetyParams& params) {
  double dir_var = 0.0;
  double mean_term = 0.0;
  for (int j = 0; j < variance.size(); ++j) {
    dir_var += c.A[j] * c.A[j] * variance[j];
    mean_term += c.A[j] * mean[j];
  }
  const double reduction = params.alpha_form == AlphaForm::kVariance
                               ? params.alpha * dir_var
                               : params.alpha * std::sqrt(dir_var);
  return mean_term - reduction - c.b;
}

struct DistChoice {
  GaussianDist dist;
  bool shaped = false;
  bool infeasible = false;
};

// Shaping decision for a zero-mean diagonal nominal whose per-dimension
// variances are precomputed.
DistChoice choose_distribution(const GaussianDist& nominal,
                               const Eigen::VectorXd& nominal_variance,
                               const std::vector<ConstraintCoeffs>& constraints,
                               const SafetyParams& params, double shaper_tolerance) {
  DistChoice choice;
  bool all_ok = true;
  for (const auto& c : constraints) {
    if (diagonal_nominal_margin(c, nominal.mean, nominal_variance, params) < 0.0) {
      all_ok = false;
      break;
    }
  }
  if (all_ok) {
    choice.dist = nominal;
    return choice;
  }
  ShaperProblem problem{nominal, constraints, params, shaper_tolerance};
  const ShaperSolution sol = shape(problem);
  if (sol.status == ShapeStatus::kShaped) {
    choice.dist = sol.shaped;
    choice.shaped = true;
    return choice;
  }
  choice.infeasible = true;
  const auto mean =
      minimal_norm_feasible_mean(constraints, static_cast<int>(nominal.mean.size()));
  if (mean.has_value()) {
    choice.dist.mean = *mean;
    choice.dist.factor =
        Eigen::MatrixXd::Zero(nominal.factor.rows(), nominal.factor.cols());
    choice.shaped = true;
  } else {
    choice.dist = nominal;
  }
  return choice;
}

}  // namespace

PerturbationResult sample_perturbation(ControlMode mode, const GaussianDist& nominal,
                                       const std::vector<ConstraintCoeffs>& constraints,
                                       const SafetyParams& params, double shaper_tolerance,
                                       NoiseStream& stream) {
  PerturbationResult result;
  // The standard-normal block is drawn unconditionally so that plain and
  // slack-constrained SCBF sampling consume the stream identically.
  const Eigen::VectorXd z = stream.normal_vector(static_cast<int>(nominal.mean.size()));

  if (mode == ControlMode::kScbf && !constraints.empty()) {
    const Eigen::VectorXd variance = nominal.factor.diagonal().cwiseAbs2();
    const DistChoice choice =
        choose_distribution(nominal, variance, constraints, params, shaper_tolerance);
    result.used = choice.dist;
    result.shaped = choice.shaped;
    result.infeasible = choice.infeasible;
  } else {
    result.used = nominal;
  }
  result.du = result.used.mean + result.used.factor * z;
  return result;
}

MppiController::MppiController(DynamicsModel model, CostSpec cost,
                               std::vector<BarrierFunction> barriers, SafetyParams safety,
                               MppiConfig config, int lift_order)
    : model_(std::move(model)),
      cost_(std::move(cost)),
      barriers_(std::move(barriers)),
      safety_(safety),
      config_(std::move(config)) {
  if (config_.samples < 1 || config_.horizon < 1) {
    throw std::invalid_argument("MppiController: samples and horizon must be >= 1");
  }
  if (config_.dt <= 0.0 || config_.temperature <= 0.0) {
    throw std::invalid_argument("MppiController: dt and temperature must be > 0");
  }
  if (config_.nominal_sigma.size() != model_.control_dim) {
    throw std::invalid_argument("MppiController: nominal_sigma dimension mismatch");
  }
  if (config_.nominal_sigma.minCoeff() < 0.0) {
    throw std::invalid_argument("MppiController: nominal_sigma must be nonnegative");
  }
  nominal_ = make_diagonal_gaussian(ControlVec::Zero(model_.control_dim),
                                    config_.nominal_sigma);
  for (const auto& bf : barriers_) {
    if (lift_order > 0) {
      chains_.push_back(high_order_lift(model_, bf, lift_order));
    } else {
      chains_.push_back(HighOrderChain{{bf}});
    }
  }
  reset();
}

void MppiController::reset() {
  schedule_.inputs.assign(config_.horizon, ControlVec::Zero(model_.control_dim));
  iteration_ = 0;
  diagnostics_ = StepDiagnostics{};
  last_batch_ = RolloutBatch{};
}

std::vector<GaussianDist> MppiController::shared_distributions(const StateVec& x0) const {
  std::vector<GaussianDist> dists;
  dists.reserve(config_.horizon);
  StateVec x = x0;
  for (int t = 0; t < config_.horizon; ++t) {
    std::vector<ConstraintCoeffs> constraints;
    constraints.reserve(chains_.size());
    for (const auto& chain : chains_) {
      constraints.push_back(high_order_coeffs(model_, chain, x));
    }
    ShaperProblem problem{nominal_, constraints, safety_, config_.shaper_tolerance};
    const ShaperSolution sol = shape(problem);
    dists.push_back(sol.status == ShapeStatus::kShaped ? sol.shaped : nominal_);
    x += drift_eval(model_, x, schedule_.inputs[t]) * config_.dt;
  }
  return dists;
}

RolloutBatch MppiController::evaluate_batch(const StateVec& x0,
                                            std::uint64_t iteration) const {
  const int K = config_.samples;
  const int T = config_.horizon;
  const int m = model_.control_dim;
  const int n = model_.state_dim;

  RolloutBatch batch;
  batch.trajectories.resize(K);
  batch.costs.assign(K, 0.0);
  batch.shaped_flags.assign(K, std::vector<bool>(T, false));
  batch.infeasible_flags.assign(K, std::vector<bool>(T, false));
  batch.theorem3_counts.assign(K, 0);

  std::vector<GaussianDist> shared;
  if (config_.mode == ControlMode::kScbf && config_.shared_shaping) {
    shared = shared_distributions(x0);
  }

  const std::uint64_t base_key = derive_key(config_.seed, kBatchTag, iteration);

  const Eigen::VectorXd nominal_variance = config_.nominal_sigma.cwiseAbs2();
  const bool scbf = config_.mode == ControlMode::kScbf;

  auto run_sample = [&](int i) {
    Trajectory traj;
    traj.dt = config_.dt;
    traj.states.reserve(T + 1);
    traj.states.push_back(x0);
    traj.controls = schedule_.inputs;
    traj.perturbations.assign(T, ControlVec::Zero(m));

    StateVec x = x0;
    std::vector<ConstraintCoeffs> constraints(chains_.size());
    double cost = 0.0;
    double log_ratio = 0.0;
    for (int t = 0; t < T; ++t) {
      NoiseStream stream(derive_key(base_key, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(t)));
      // one model evaluation per state, shared by the constraint
      // coefficients and the integration step
      const StateVec f = model_.drift(x);
      const Eigen::MatrixXd g = model_.input_map(x);
      const Eigen::MatrixXd sigma = model_.diffusion(x);
      Eigen::MatrixXd sigma_sq;  // sigma sigma^T, only needed for constraints
      if (scbf && !config_.shared_shaping) sigma_sq = sigma * sigma.transpose();

      const Eigen::VectorXd z = stream.normal_vector(m);
      ControlVec du(m);
      bool shaped = false;
      bool infeasible = false;
      GaussianDist used;
      bool used_is_nominal = true;
      if (scbf && config_.shared_shaping) {
        const GaussianDist& dist = shared[t];
        shaped = dist.mean != nominal_.mean || dist.factor != nominal_.factor;
        du = dist.mean + dist.factor.diagonal().cwiseProduct(z);
        if (shaped) {
          used = dist;
          used_is_nominal = false;
        }
      } else if (scbf) {
        for (std::size_t k = 0; k < chains_.size(); ++k) {
          const auto& chain = chains_[k];
          const auto& top = chain.levels.back();
          const Eigen::VectorXd grad = top.gradient(x);
          const Eigen::MatrixXd hess = top.hessian(x);
          constraints[k].A = grad.transpose() * g;
          // Tr(sigma^T H sigma) = <H, sigma sigma^T>
          constraints[k].b =
              -top.value(x) - grad.dot(f) - 0.5 * hess.cwiseProduct(sigma_sq).sum();
          if (chain.levels.size() > 1) {
            // Monitor the sign condition the high-order guarantee assumes
            // on the intermediate levels.
            for (std::size_t lvl = 0; lvl + 1 < chain.levels.size(); ++lvl) {
              const Eigen::RowVectorXd a = chain.levels[lvl].gradient(x).transpose() * g;
              if (a.minCoeff() < -1e-12) {
                ++batch.theorem3_counts[i];
                break;
              }
            }
          }
        }
        const DistChoice choice = choose_distribution(
            nominal_, nominal_variance, constraints, safety_, config_.shaper_tolerance);
        shaped = choice.shaped;
        infeasible = choice.infeasible;
        if (choice.shaped) {
          du = choice.dist.mean + choice.dist.factor.diagonal().cwiseProduct(z);
          used = choice.dist;
          used_is_nominal = false;
        } else {
          du = config_.nominal_sigma.cwiseProduct(z);
        }
      } else {
        du = config_.nominal_sigma.cwiseProduct(z);
      }
      batch.shaped_flags[i][t] = shaped;
      batch.infeasible_flags[i][t] = infeasible;

      const ControlVec u_eff = schedule_.inputs[t] + du;
      const StateVec noise = stream.normal_vector(n);
      x = em_step_with(x, f, g, sigma, u_eff, config_.dt, noise);
      traj.states.push_back(x);
      traj.perturbations[t] = du;

      const bool safe = is_safe(x, barriers_);
      cost += running_cost(cost_, x, safe, schedule_.inputs[t], du);
      if (config_.importance_ratio && !used_is_nominal) {
        log_ratio += log_density_diag(du, used) - log_density_diag(du, nominal_);
      }
    }
    if (cost_.terminal) cost += cost_.terminal(traj.states.back());
    cost += config_.temperature * log_ratio;
    batch.costs[i] = cost;
    batch.trajectories[i] = std::move(traj);
  };

  int workers = config_.workers > 0
                    ? config_.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, K);
  if (workers == 1) {
    for (int i = 0; i < K; ++i) run_sample(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < K; i += workers) run_sample(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return batch;
}

ControlVec MppiController::step(const StateVec& x) {
  RolloutBatch batch = evaluate_batch(x, iteration_);
  ++iteration_;

  const WeightVector weights = compute_weights(batch.costs, config_.temperature);
  schedule_ = update_schedule(schedule_, batch, weights);
  const ControlVec u0 = schedule_.inputs.front();
  schedule_ = shift_horizon(schedule_, ControlVec::Zero(model_.control_dim));

  StepDiagnostics d;
  d.baseline_cost = *std::min_element(batch.costs.begin(), batch.costs.end());
  d.weight_entropy = 0.0;
  for (int i = 0; i < weights.weights.size(); ++i) {
    const double w = weights.weights[i];
    if (w > 0.0) d.weight_entropy -= w * std::log(w);
  }
  d.shaped_count = 0;
  d.infeasible_count = 0;
  d.theorem3_flags = 0;
  std::vector<Eigen::VectorXd> all_du;
  all_du.reserve(static_cast<std::size_t>(config_.samples) * config_.horizon);
  for (int i = 0; i < config_.samples; ++i) {
    for (int t = 0; t < config_.horizon; ++t) {
      d.shaped_count += batch.shaped_flags[i][t] ? 1 : 0;
      d.infeasible_count += batch.infeasible_flags[i][t] ? 1 : 0;
      all_du.push_back(batch.trajectories[i].perturbations[t]);
    }
    d.theorem3_flags += batch.theorem3_counts[i];
  }
  d.perturbation_variance = estimate_var_du(all_du);
  double e1 = 0.0;
  for (double c : batch.costs) e1 += std::exp(-(c - d.baseline_cost) / config_.temperature);
  d.e1_hat = e1 / static_cast<double>(batch.costs.size());
  diagnostics_ = std::move(d);
  last_batch_ = std::move(batch);
  return u0;
}

}  // namespace scbf_mppi
