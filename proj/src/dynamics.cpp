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

#include "scbf_mppi/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace scbf_mppi {

StateVec drift_eval(const DynamicsModel& model, const StateVec& x, const ControlVec& u) {
  if (x.size() != model.state_dim || u.size() != model.control_dim) {
    throw std::invalid_argument("drift_eval: dimension mismatch");
  }
  return model.drift(x) + model.input_map(x) * u;
}

StateVec em_step(const DynamicsModel& model, const StateVec& x, const ControlVec& u,
                 double dt, const StateVec& noise) {
  if (noise.size() != model.state_dim) {
    throw std::invalid_argument("em_step: noise dimension mismatch");
  }
  if (x.size() != model.state_dim || u.size() != model.control_dim) {
    throw std::invalid_argument("em_step: dimension mismatch");
  }
  return em_step_with(x, model.drift(x), model.input_map(x), model.diffusion(x), u, dt,
                      noise);
}

StateVec em_step_with(const StateVec& x, const StateVec& f, const Eigen::MatrixXd& g,
                      const Eigen::MatrixXd& sigma, const ControlVec& u, double dt,
                      const StateVec& noise) {
  if (dt <= 0.0) throw std::invalid_argument("em_step: dt must be positive");
  StateVec next = x + (f + g * u) * dt + sigma * noise * std::sqrt(dt);
  if (!next.allFinite()) throw std::overflow_error("em_step: non-finite state");
  return next;
}

Trajectory rollout(const DynamicsModel& model, const StateVec& x0,
                   const std::vector<ControlVec>& controls,
                   const std::vector<ControlVec>& perturbations, double dt,
                   std::uint64_t noise_key) {
  if (controls.size() != perturbations.size() || controls.empty()) {
    throw std::invalid_argument("rollout: controls/perturbations must have equal length >= 1");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  traj.controls = controls;
  traj.perturbations = perturbations;
  StateVec x = x0;
  for (std::size_t t = 0; t < controls.size(); ++t) {
    NoiseStream stream(derive_key(noise_key, t));
    const StateVec noise = stream.normal_vector(model.state_dim);
    x = em_step(model, x, controls[t] + perturbations[t], dt, noise);
    traj.states.push_back(x);
  }
  return traj;
}

DynamicsModel unicycle_model(double sigma_scale) {
  DynamicsModel m;
  m.state_dim = 3;
  m.control_dim = 2;
  m.drift = [](const StateVec& x) { return StateVec::Zero(x.size()); };
  m.input_map = [](const StateVec& x) {
    Eigen::MatrixXd g(3, 2);
    g << std::cos(x[2]), 0.0,
         std::sin(x[2]), 0.0,
         0.0, 1.0;
    return g;
  };
  m.diffusion = [sigma_scale](const StateVec&) {
    return Eigen::MatrixXd(sigma_scale * Eigen::MatrixXd::Identity(3, 3));
  };
  m.sym_drift = sym::ExprVector{sym::constant(0.0), sym::constant(0.0), sym::constant(0.0)};
  sym::ExprMatrix sd(3, sym::ExprVector(3, sym::constant(0.0)));
  for (int i = 0; i < 3; ++i) sd[i][i] = sym::constant(sigma_scale);
  m.sym_diffusion = std::move(sd);
  return m;
}

DynamicsModel double_integrator_model(double sigma_scale) {
  DynamicsModel m;
  m.state_dim = 2;
  m.control_dim = 1;
  m.drift = [](const StateVec& x) {
    StateVec f(2);
    f << x[1], 0.0;
    return f;
  };
  m.input_map = [](const StateVec&) {
    Eigen::MatrixXd g(2, 1);
    g << 0.0, 1.0;
    return g;
  };
  m.diffusion = [sigma_scale](const StateVec&) {
    return Eigen::MatrixXd(sigma_scale * Eigen::MatrixXd::Identity(2, 2));
  };
  m.sym_drift = sym::ExprVector{sym::var(1), sym::constant(0.0)};
  sym::ExprMatrix sd(2, sym::ExprVector(2, sym::constant(0.0)));
  for (int i = 0; i < 2; ++i) sd[i][i] = sym::constant(sigma_scale);
  m.sym_diffusion = std::move(sd);
  return m;
}

}  // namespace scbf_mppi
