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

#include "scbf_mppi/cost.hpp"

#include <stdexcept>

namespace scbf_mppi {

CostSpec make_cost_spec(const Eigen::Vector2d& goal, int control_dim) {
  CostSpec spec;
  spec.goal = goal;
  spec.control_weight = Eigen::MatrixXd::Identity(control_dim, control_dim);
  return spec;
}

double state_cost(const CostSpec& spec, const StateVec& x, bool safe) {
  const Eigen::Vector2d pos = x.head<2>();
  double q = (pos - spec.goal).squaredNorm() * spec.state_weight;
  if (!safe) q += spec.obstacle_penalty;
  return q;
}

double running_cost(const CostSpec& spec, const StateVec& x, bool safe,
                    const ControlVec& v, const ControlVec& eps) {
  const Eigen::MatrixXd& R = spec.control_weight;
  if (v.size() != R.rows() || eps.size() != R.rows()) {
    throw std::invalid_argument("running_cost: control dimension mismatch");
  }
  const double quad_eps = eps.dot(R * eps);
  const double cross = v.dot(R * eps);
  const double quad_v = v.dot(R * v);
  return state_cost(spec, x, safe) +
         0.5 * (1.0 - 1.0 / spec.variance_ratio) * quad_eps + cross + 0.5 * quad_v;
}

double trajectory_cost(const CostSpec& spec, const Trajectory& traj,
                       const std::vector<bool>& safeness) {
  if (safeness.size() != traj.states.size()) {
    throw std::invalid_argument("trajectory_cost: safeness length must match states");
  }
  double s = spec.terminal ? spec.terminal(traj.states.back()) : 0.0;
  for (std::size_t t = 0; t < traj.controls.size(); ++t) {
    s += running_cost(spec, traj.states[t + 1], safeness[t + 1], traj.controls[t],
                      traj.perturbations[t]);
  }
  return s;
}

}  // namespace scbf_mppi
