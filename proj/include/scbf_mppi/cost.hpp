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

#include <functional>
#include <vector>

#include "scbf_mppi/dynamics.hpp"

namespace scbf_mppi {

/// Cost parameters. The state cost is quadratic in the planar position with
/// an indicator penalty outside the safe set; the control terms follow the
/// path-integral running cost with temperature lambda and injection ratio nu.
struct CostSpec {
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double state_weight = 1.0;
  double obstacle_penalty = 1000.0;
  Eigen::MatrixXd control_weight;  // R, m x m positive definite
  double temperature = 1.0;        // lambda > 0
  double variance_ratio = 1.0;     // nu > 0
  std::function<double(const StateVec&)> terminal;  // phi; nullptr means 0
};

CostSpec make_cost_spec(const Eigen::Vector2d& goal, int control_dim);

/// ||(x, y) - goal||^2 * state_weight + obstacle_penalty * (1 - safe).
double state_cost(const CostSpec& spec, const StateVec& x, bool safe);

/// q(x) + (1 - 1/nu)/2 eps^T R eps + v^T R eps + 1/2 v^T R v.
double running_cost(const CostSpec& spec, const StateVec& x, bool safe,
                    const ControlVec& v, const ControlVec& eps);

/// phi(x_T) + sum of per-step running costs. The state and safe flag for step
/// t are the post-step values states[t+1] / safeness[t+1]; safeness must have
/// one entry per state.
double trajectory_cost(const CostSpec& spec, const Trajectory& traj,
                       const std::vector<bool>& safeness);

}  // namespace scbf_mppi
