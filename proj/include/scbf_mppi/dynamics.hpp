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
#include <functional>
#include <optional>
#include <vector>

#include "scbf_mppi/rng.hpp"
#include "scbf_mppi/symbolic.hpp"

namespace scbf_mppi {

using StateVec = Eigen::VectorXd;
using ControlVec = Eigen::VectorXd;

/// Control-affine stochastic dynamics dx = (f(x) + g(x) u) dt + sigma(x) dW.
///
/// The closed-form drift/diffusion expressions are optional; they are only
/// required when a barrier of relative degree > 1 has to be lifted through
/// the dynamics (see barrier.hpp).
struct DynamicsModel {
  int state_dim = 0;
  int control_dim = 0;
  std::function<StateVec(const StateVec&)> drift;                // f
  std::function<Eigen::MatrixXd(const StateVec&)> input_map;     // g
  std::function<Eigen::MatrixXd(const StateVec&)> diffusion;     // sigma

  std::optional<sym::ExprVector> sym_drift;
  std::optional<sym::ExprMatrix> sym_diffusion;
};

/// Time-indexed rollout record. `controls` holds the nominal schedule values,
/// `perturbations` the sampled deviations; the executed input at step t is
/// controls[t] + perturbations[t]. states.size() == controls.size() + 1.
struct Trajectory {
  std::vector<StateVec> states;
  std::vector<ControlVec> controls;
  std::vector<ControlVec> perturbations;
  double dt = 0.0;
};

/// f(x) + g(x) u. Throws std::invalid_argument on dimension mismatch.
StateVec drift_eval(const DynamicsModel& model, const StateVec& x, const ControlVec& u);

/// One Euler-Maruyama step: x + (f + g u) dt + sigma(x) noise sqrt(dt).
/// `noise` must be a state-dim vector of standard normal draws. Throws
/// std::invalid_argument when dt <= 0 and std::overflow_error when the
/// result is not finite.
StateVec em_step(const DynamicsModel& model, const StateVec& x, const ControlVec& u,
                 double dt, const StateVec& noise);

/// Same update from pre-evaluated drift/input/diffusion terms; the batched
/// sampling loop shares one model evaluation per state across the barrier
/// coefficients and the integration step.
StateVec em_step_with(const StateVec& x, const StateVec& f, const Eigen::MatrixXd& g,
                      const Eigen::MatrixXd& sigma, const ControlVec& u, double dt,
                      const StateVec& noise);

/// Rolls the SDE forward for controls.size() steps with effective input
/// controls[t] + perturbations[t]. Process noise for step t is drawn from a
/// substream keyed on (noise_key, t), so results do not depend on evaluation
/// order.
Trajectory rollout(const DynamicsModel& model, const StateVec& x0,
                   const std::vector<ControlVec>& controls,
                   const std::vector<ControlVec>& perturbations, double dt,
                   std::uint64_t noise_key);

/// Planar unicycle: state (x, y, theta), input (v, omega), zero drift,
/// diffusion sigma_scale * I.
DynamicsModel unicycle_model(double sigma_scale = 1.0);

/// 1-D double integrator: state (x, v), input a; used to exercise barriers
/// of relative degree 2.
DynamicsModel double_integrator_model(double sigma_scale = 0.0);

}  // namespace scbf_mppi
