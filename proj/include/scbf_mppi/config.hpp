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

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "scbf_mppi/barrier.hpp"
#include "scbf_mppi/cost.hpp"
#include "scbf_mppi/dynamics.hpp"
#include "scbf_mppi/mppi.hpp"

namespace scbf_mppi {

using ojson = nlohmann::ordered_json;

struct EnvironmentSpec {
  std::string barrier_set = "narrow_passage";
  double passage_width = 1.0;
  double wave_frequency = 1.0;  // sin(freq * x) walls
  StateVec start;
  Eigen::Vector2d goal;
  double vicinity_radius = 0.15;
  int max_steps = 250;
  int lift_order = 0;
};

struct CostConfig {
  double state_weight = 1.0;
  double obstacle_penalty = 1000.0;
  Eigen::MatrixXd control_weight;  // R
  double variance_ratio = 1.0;     // nu
  double terminal_weight = 0.0;    // phi = w * ||pos - goal||^2
};

struct ComplexityConfig {
  double eps1 = 0.05;
  double eps2 = 0.1;
  double rho1 = 0.05;
  double rho2 = 0.1;
  int step = 50;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  MppiConfig controller;
  double sigma_scale = 0.05;  // process-noise multiplier on the model diffusion
  CostConfig cost;
  double safety_delta = 0.003;
  std::optional<double> safety_alpha;  // empty => normal quantile of 1 - delta
  AlphaForm alpha_form = AlphaForm::kVariance;
  ComplexityConfig complexity;
  int trials = 10;
  std::uint64_t seed = 2026;
};

ExperimentConfig default_config();

/// Parses a config object; unknown keys anywhere are rejected with
/// std::invalid_argument naming the offending key.
ExperimentConfig parse_config(const ojson& j);

ExperimentConfig load_config(const std::string& path);

ojson config_to_json(const ExperimentConfig& cfg);

// Builders assembling the runtime objects a config describes.
DynamicsModel build_model(const ExperimentConfig& cfg);
std::vector<BarrierFunction> build_barriers(const ExperimentConfig& cfg);
CostSpec build_cost_spec(const ExperimentConfig& cfg, int control_dim);
SafetyParams build_safety_params(const ExperimentConfig& cfg);
MppiController build_controller(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace scbf_mppi
