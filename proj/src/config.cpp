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

#include "scbf_mppi/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace scbf_mppi {

namespace {

void require_keys(const ojson& j, const std::string& section,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw std::invalid_argument("config section '" + section + "' must be an object");
  }
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw std::invalid_argument("unknown config key '" + section + "." + item.key() + "'");
    }
  }
}

Eigen::VectorXd read_vector(const ojson& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + " must be an array");
  Eigen::VectorXd v(j.size());
  int i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

Eigen::MatrixXd read_matrix(const ojson& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(what + " must be a matrix");
  const std::size_t cols = j.front().size();
  Eigen::MatrixXd m(j.size(), cols);
  int r = 0;
  for (const auto& row : j) {
    if (row.size() != cols) throw std::invalid_argument(what + " rows must be equal length");
    int c = 0;
    for (const auto& e : row) m(r, c++) = e.get<double>();
    ++r;
  }
  return m;
}

ojson vector_to_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ojson matrix_to_json(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (int r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.environment.barrier_set = "narrow_passage";
  cfg.environment.passage_width = 1.0;
  // half-pi frequency: the passage runs one full period over the 4 m course
  // and both the start and the goal sit on the corridor center line
  cfg.environment.wave_frequency = M_PI_2;
  cfg.environment.start = Eigen::Vector3d(0.0, 0.5, 0.0);
  cfg.environment.goal = Eigen::Vector2d(4.0, 0.5);
  cfg.environment.vicinity_radius = 0.15;
  cfg.environment.max_steps = 250;
  cfg.environment.lift_order = 0;

  cfg.controller.samples = 500;
  cfg.controller.horizon = 20;
  cfg.controller.dt = 0.05;
  cfg.controller.temperature = 1.0;
  cfg.controller.nominal_sigma = Eigen::Vector2d(0.75, 0.75);
  cfg.controller.mode = ControlMode::kScbf;
  cfg.controller.seed = 0;  // overwritten per trial
  cfg.controller.importance_ratio = false;
  cfg.controller.shared_shaping = false;
  cfg.controller.shaper_tolerance = 1e-8;
  cfg.controller.workers = 0;
  cfg.sigma_scale = 0.05;

  cfg.cost.state_weight = 1.0;
  cfg.cost.obstacle_penalty = 1000.0;
  cfg.cost.control_weight = Eigen::Matrix2d::Identity();
  cfg.cost.variance_ratio = 1.0;
  cfg.cost.terminal_weight = 0.0;

  cfg.safety_delta = 0.003;
  cfg.safety_alpha = std::nullopt;
  cfg.alpha_form = AlphaForm::kVariance;

  cfg.complexity = ComplexityConfig{};
  cfg.trials = 10;
  cfg.seed = 2026;
  return cfg;
}

ExperimentConfig parse_config(const ojson& j) {
  require_keys(j, "<root>",
               {"environment", "controller", "cost", "safety", "complexity", "trials",
                "seed"});
  ExperimentConfig cfg = default_config();

  if (j.contains("environment")) {
    const auto& e = j.at("environment");
    require_keys(e, "environment",
                 {"barrier_set", "passage_width", "wave_frequency", "start", "goal",
                  "vicinity_radius", "max_steps", "lift_order"});
    auto& env = cfg.environment;
    env.barrier_set = e.value("barrier_set", env.barrier_set);
    env.passage_width = e.value("passage_width", env.passage_width);
    env.wave_frequency = e.value("wave_frequency", env.wave_frequency);
    if (e.contains("start")) env.start = read_vector(e.at("start"), "environment.start");
    if (e.contains("goal")) {
      const Eigen::VectorXd g = read_vector(e.at("goal"), "environment.goal");
      if (g.size() != 2) throw std::invalid_argument("environment.goal must have length 2");
      env.goal = g.head<2>();
    }
    env.vicinity_radius = e.value("vicinity_radius", env.vicinity_radius);
    env.max_steps = e.value("max_steps", env.max_steps);
    env.lift_order = e.value("lift_order", env.lift_order);
    if (env.vicinity_radius <= 0.0) {
      throw std::invalid_argument("environment.vicinity_radius must be > 0");
    }
  }

  if (j.contains("controller")) {
    const auto& c = j.at("controller");
    require_keys(c, "controller",
                 {"samples", "horizon", "dt", "temperature", "nominal_sigma", "mode",
                  "sigma_scale", "importance_ratio", "shared_shaping", "shaper_tolerance",
                  "workers"});
    auto& ctl = cfg.controller;
    ctl.samples = c.value("samples", ctl.samples);
    ctl.horizon = c.value("horizon", ctl.horizon);
    ctl.dt = c.value("dt", ctl.dt);
    ctl.temperature = c.value("temperature", ctl.temperature);
    if (c.contains("nominal_sigma")) {
      ctl.nominal_sigma = read_vector(c.at("nominal_sigma"), "controller.nominal_sigma");
    }
    if (c.contains("mode")) {
      const std::string mode = c.at("mode").get<std::string>();
      if (mode == "plain") {
        ctl.mode = ControlMode::kPlain;
      } else if (mode == "scbf") {
        ctl.mode = ControlMode::kScbf;
      } else {
        throw std::invalid_argument("controller.mode must be 'plain' or 'scbf'");
      }
    }
    cfg.sigma_scale = c.value("sigma_scale", cfg.sigma_scale);
    ctl.importance_ratio = c.value("importance_ratio", ctl.importance_ratio);
    ctl.shared_shaping = c.value("shared_shaping", ctl.shared_shaping);
    ctl.shaper_tolerance = c.value("shaper_tolerance", ctl.shaper_tolerance);
    ctl.workers = c.value("workers", ctl.workers);
  }

  if (j.contains("cost")) {
    const auto& c = j.at("cost");
    require_keys(c, "cost",
                 {"state_weight", "obstacle_penalty", "control_weight", "variance_ratio",
                  "terminal_weight"});
    cfg.cost.state_weight = c.value("state_weight", cfg.cost.state_weight);
    cfg.cost.obstacle_penalty = c.value("obstacle_penalty", cfg.cost.obstacle_penalty);
    if (c.contains("control_weight")) {
      cfg.cost.control_weight = read_matrix(c.at("control_weight"), "cost.control_weight");
    }
    cfg.cost.variance_ratio = c.value("variance_ratio", cfg.cost.variance_ratio);
    cfg.cost.terminal_weight = c.value("terminal_weight", cfg.cost.terminal_weight);
  }

  if (j.contains("safety")) {
    const auto& s = j.at("safety");
    require_keys(s, "safety", {"delta", "alpha", "alpha_form", "tolerance"});
    cfg.safety_delta = s.value("delta", cfg.safety_delta);
    if (s.contains("alpha") && !s.at("alpha").is_null()) {
      cfg.safety_alpha = s.at("alpha").get<double>();
    }
    if (s.contains("alpha_form")) {
      const std::string form = s.at("alpha_form").get<std::string>();
      if (form == "variance") {
        cfg.alpha_form = AlphaForm::kVariance;
      } else if (form == "stddev") {
        cfg.alpha_form = AlphaForm::kStdDev;
      } else {
        throw std::invalid_argument("safety.alpha_form must be 'variance' or 'stddev'");
      }
    }
    cfg.controller.shaper_tolerance = s.value("tolerance", cfg.controller.shaper_tolerance);
  }

  if (j.contains("complexity")) {
    const auto& c = j.at("complexity");
    require_keys(c, "complexity", {"eps1", "eps2", "rho1", "rho2", "step"});
    cfg.complexity.eps1 = c.value("eps1", cfg.complexity.eps1);
    cfg.complexity.eps2 = c.value("eps2", cfg.complexity.eps2);
    cfg.complexity.rho1 = c.value("rho1", cfg.complexity.rho1);
    cfg.complexity.rho2 = c.value("rho2", cfg.complexity.rho2);
    cfg.complexity.step = c.value("step", cfg.complexity.step);
  }

  cfg.trials = j.value("trials", cfg.trials);
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ojson j;
  in >> j;
  return parse_config(j);
}

ojson config_to_json(const ExperimentConfig& cfg) {
  ojson j;
  j["environment"] = {
      {"barrier_set", cfg.environment.barrier_set},
      {"passage_width", cfg.environment.passage_width},
      {"wave_frequency", cfg.environment.wave_frequency},
      {"start", vector_to_json(cfg.environment.start)},
      {"goal", vector_to_json(cfg.environment.goal)},
      {"vicinity_radius", cfg.environment.vicinity_radius},
      {"max_steps", cfg.environment.max_steps},
      {"lift_order", cfg.environment.lift_order},
  };
  j["controller"] = {
      {"samples", cfg.controller.samples},
      {"horizon", cfg.controller.horizon},
      {"dt", cfg.controller.dt},
      {"temperature", cfg.controller.temperature},
      {"nominal_sigma", vector_to_json(cfg.controller.nominal_sigma)},
      {"mode", cfg.controller.mode == ControlMode::kScbf ? "scbf" : "plain"},
      {"sigma_scale", cfg.sigma_scale},
      {"importance_ratio", cfg.controller.importance_ratio},
      {"shared_shaping", cfg.controller.shared_shaping},
      {"shaper_tolerance", cfg.controller.shaper_tolerance},
      {"workers", cfg.controller.workers},
  };
  j["cost"] = {
      {"state_weight", cfg.cost.state_weight},
      {"obstacle_penalty", cfg.cost.obstacle_penalty},
      {"control_weight", matrix_to_json(cfg.cost.control_weight)},
      {"variance_ratio", cfg.cost.variance_ratio},
      {"terminal_weight", cfg.cost.terminal_weight},
  };
  j["safety"] = {
      {"delta", cfg.safety_delta},
      {"alpha", cfg.safety_alpha.has_value() ? ojson(*cfg.safety_alpha) : ojson(nullptr)},
      {"alpha_form", cfg.alpha_form == AlphaForm::kVariance ? "variance" : "stddev"},
      {"tolerance", cfg.controller.shaper_tolerance},
  };
  j["complexity"] = {
      {"eps1", cfg.complexity.eps1}, {"eps2", cfg.complexity.eps2},
      {"rho1", cfg.complexity.rho1}, {"rho2", cfg.complexity.rho2},
      {"step", cfg.complexity.step},
  };
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  return j;
}

DynamicsModel build_model(const ExperimentConfig& cfg) {
  if (cfg.environment.barrier_set == "double_integrator_demo") {
    return double_integrator_model(cfg.sigma_scale);
  }
  return unicycle_model(cfg.sigma_scale);
}

std::vector<BarrierFunction> build_barriers(const ExperimentConfig& cfg) {
  return barrier_set_by_name(cfg.environment.barrier_set, cfg.environment.passage_width,
                             cfg.environment.wave_frequency);
}

CostSpec build_cost_spec(const ExperimentConfig& cfg, int control_dim) {
  CostSpec spec = make_cost_spec(cfg.environment.goal, control_dim);
  spec.state_weight = cfg.cost.state_weight;
  spec.obstacle_penalty = cfg.cost.obstacle_penalty;
  if (cfg.cost.control_weight.size() > 0) {
    if (cfg.cost.control_weight.rows() != control_dim ||
        cfg.cost.control_weight.cols() != control_dim) {
      throw std::invalid_argument("cost.control_weight must be m x m");
    }
    spec.control_weight = cfg.cost.control_weight;
  }
  spec.temperature = cfg.controller.temperature;
  spec.variance_ratio = cfg.cost.variance_ratio;
  if (cfg.cost.terminal_weight != 0.0) {
    const Eigen::Vector2d goal = cfg.environment.goal;
    const double w = cfg.cost.terminal_weight;
    spec.terminal = [goal, w](const StateVec& x) {
      return w * (x.head<2>() - goal).squaredNorm();
    };
  }
  return spec;
}

SafetyParams build_safety_params(const ExperimentConfig& cfg) {
  return make_safety_params(cfg.safety_delta, cfg.safety_alpha, cfg.alpha_form);
}

MppiController build_controller(const ExperimentConfig& cfg, std::uint64_t seed) {
  DynamicsModel model = build_model(cfg);
  MppiConfig mppi = cfg.controller;
  mppi.seed = seed;
  return MppiController(model, build_cost_spec(cfg, model.control_dim),
                        build_barriers(cfg), build_safety_params(cfg), mppi,
                        cfg.environment.lift_order);
}

}  // namespace scbf_mppi
