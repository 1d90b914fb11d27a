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

#include "scbf_mppi/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace scbf_mppi {

const char* const kVersionString = "scbf-mppi 0.1.0";

namespace {

constexpr std::uint64_t kExecNoiseTag = 0x65786563ULL;   // closed-loop process noise
constexpr std::uint64_t kTrialSeedTag = 0x747269616cULL; // per-trial controller seeds

bool in_vicinity(const StateVec& x, const Eigen::Vector2d& goal, double radius) {
  return (x.head<2>() - goal).norm() <= radius;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  const DynamicsModel model = build_model(cfg);
  const std::vector<BarrierFunction> barriers = build_barriers(cfg);
  if (!is_safe(cfg.environment.start, barriers)) {
    throw std::invalid_argument("run_trial: start state is outside the safe set");
  }
  MppiController controller = build_controller(cfg, trial_seed);

  TrialRecord record;
  record.trajectory.dt = cfg.controller.dt;
  record.trajectory.states.push_back(cfg.environment.start);

  StateVec x = cfg.environment.start;
  for (int step = 0; step <= cfg.environment.max_steps; ++step) {
    if (in_vicinity(x, cfg.environment.goal, cfg.environment.vicinity_radius)) {
      record.ttf = step;
      break;
    }
    if (step == cfg.environment.max_steps) break;

    const ControlVec u = controller.step(x);
    NoiseStream exec_noise(derive_key(trial_seed, kExecNoiseTag,
                                      static_cast<std::uint64_t>(step)));
    x = em_step(model, x, u, cfg.controller.dt, exec_noise.normal_vector(model.state_dim));

    record.trajectory.states.push_back(x);
    record.trajectory.controls.push_back(u);
    record.trajectory.perturbations.push_back(ControlVec::Zero(model.control_dim));
    const bool safe = is_safe(x, barriers);
    record.safeness.push_back(safe);
    if (!safe) ++record.collisions;
    record.diagnostics.push_back(controller.last_diagnostics());
  }
  return record;
}

double collision_rate(const TrialRecord& record) {
  if (record.trajectory.states.empty()) {
    throw std::invalid_argument("collision_rate: empty trajectory");
  }
  const std::size_t visited = record.trajectory.states.size() - 1;
  if (visited == 0) return 0.0;
  return static_cast<double>(record.collisions) / static_cast<double>(visited);
}

std::optional<int> time_to_finish(const TrialRecord& record, const Eigen::Vector2d& goal,
                                  double radius) {
  for (std::size_t i = 0; i < record.trajectory.states.size(); ++i) {
    if (in_vicinity(record.trajectory.states[i], goal, radius)) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg,
                              const std::vector<BenchmarkCell>& grid, int trials) {
  if (trials < 1) throw std::invalid_argument("run_benchmark: trials must be >= 1");
  BenchmarkResult result;
  result.grid = grid;
  for (const auto& cell : grid) {
    ExperimentConfig cell_cfg = cfg;
    cell_cfg.controller.mode = cell.mode;
    cell_cfg.controller.samples = cell.samples;

    std::vector<TrialRecord> records;
    records.reserve(trials);
    BenchmarkRow row;
    row.algorithm = cell.mode == ControlMode::kScbf ? "scbf-mppi" : "mppi";
    row.samples = cell.samples;
    row.trials = trials;

    double rate_sum = 0.0;
    double ttf_sum = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      const std::uint64_t seed =
          derive_key(cfg.seed, kTrialSeedTag, static_cast<std::uint64_t>(trial));
      TrialRecord record = run_trial(cell_cfg, seed);
      rate_sum += collision_rate(record);
      row.total_collisions += record.collisions;
      if (record.ttf.has_value()) {
        ++row.finished;
        ttf_sum += static_cast<double>(*record.ttf);
      }
      records.push_back(std::move(record));
    }
    row.mean_collision_rate = rate_sum / static_cast<double>(trials);
    row.mean_ttf = row.finished > 0 ? ttf_sum / static_cast<double>(row.finished)
                                    : std::numeric_limits<double>::quiet_NaN();
    result.table.rows.push_back(std::move(row));
    result.records.push_back(std::move(records));
  }
  return result;
}

std::vector<BenchmarkCell> parse_grid(const std::string& spec) {
  std::vector<BenchmarkCell> grid;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("grid cell must look like 'plain:200': " + item);
    }
    BenchmarkCell cell;
    const std::string mode = item.substr(0, colon);
    if (mode == "plain") {
      cell.mode = ControlMode::kPlain;
    } else if (mode == "scbf") {
      cell.mode = ControlMode::kScbf;
    } else {
      throw std::invalid_argument("grid algorithm must be 'plain' or 'scbf': " + mode);
    }
    cell.samples = std::stoi(item.substr(colon + 1));
    if (cell.samples < 1) throw std::invalid_argument("grid sample count must be >= 1");
    grid.push_back(cell);
  }
  if (grid.empty()) throw std::invalid_argument("empty benchmark grid");
  return grid;
}

namespace {

ComplexityReport measure_mode(const ExperimentConfig& cfg, ControlMode mode) {
  ExperimentConfig run_cfg = cfg;
  run_cfg.controller.mode = mode;
  const DynamicsModel model = build_model(run_cfg);
  const std::uint64_t seed = derive_key(cfg.seed, kTrialSeedTag, 0xA11);
  MppiController controller = build_controller(run_cfg, seed);

  const int measure_step = cfg.complexity.step;
  StateVec x = cfg.environment.start;
  for (int step = 0;; ++step) {
    const ControlVec u = controller.step(x);
    if (step == measure_step) break;
    if (step >= cfg.environment.max_steps) {
      throw std::runtime_error("run_samplesize: measurement step beyond max_steps");
    }
    NoiseStream exec_noise(derive_key(seed, kExecNoiseTag,
                                      static_cast<std::uint64_t>(step)));
    x = em_step(model, x, u, cfg.controller.dt, exec_noise.normal_vector(model.state_dim));
  }

  const RolloutBatch& batch = controller.last_batch();
  const double beta = controller.last_diagnostics().baseline_cost;
  std::vector<double> shifted(batch.costs.size());
  for (std::size_t i = 0; i < batch.costs.size(); ++i) shifted[i] = batch.costs[i] - beta;
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(batch.trajectories.size() * cfg.controller.horizon);
  for (const auto& traj : batch.trajectories) {
    for (const auto& du : traj.perturbations) draws.push_back(du);
  }

  ComplexityInputs inputs;
  inputs.eps1 = cfg.complexity.eps1;
  inputs.eps2 = cfg.complexity.eps2;
  inputs.rho1 = cfg.complexity.rho1;
  inputs.rho2 = cfg.complexity.rho2;
  inputs.temperature = cfg.controller.temperature;

  EmpiricalStats stats;
  stats.e1_hat = estimate_e1(shifted, cfg.controller.temperature);
  stats.var_du = estimate_var_du(draws);
  stats.n_used = static_cast<std::int64_t>(batch.costs.size());
  return make_complexity_report(inputs, stats);
}

}  // namespace

SampleSizeResult run_samplesize(const ExperimentConfig& cfg) {
  SampleSizeResult result;
  result.step = cfg.complexity.step;
  result.plain = measure_mode(cfg, ControlMode::kPlain);
  result.scbf = measure_mode(cfg, ControlMode::kScbf);
  return result;
}

void write_trials_csv(const std::vector<TrialRecord>& records,
                      const std::vector<BarrierFunction>& barriers,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "trial,step,x,y,theta,v,omega,h1,h2,safe\n";
  for (std::size_t trial = 0; trial < records.size(); ++trial) {
    const Trajectory& traj = records[trial].trajectory;
    for (std::size_t t = 0; t < traj.controls.size(); ++t) {
      const StateVec& x = traj.states[t + 1];
      const ControlVec& u = traj.controls[t];
      const double h1 = barriers.size() > 0 ? barriers[0].value(x) : 0.0;
      const double h2 = barriers.size() > 1 ? barriers[1].value(x) : 0.0;
      out << trial << ',' << (t + 1) << ',' << format_double(x[0]) << ','
          << format_double(x[1]) << ',' << format_double(x.size() > 2 ? x[2] : 0.0) << ','
          << format_double(u[0]) << ',' << format_double(u.size() > 1 ? u[1] : 0.0) << ','
          << format_double(h1) << ',' << format_double(h2) << ','
          << (records[trial].safeness[t] ? 1 : 0) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

ojson record_json(const TrialRecord& record) {
  ojson j;
  j["steps"] = record.trajectory.controls.size();
  j["ttf"] = record.ttf.has_value() ? ojson(*record.ttf) : ojson(nullptr);
  j["collisions"] = record.collisions;
  j["collision_rate"] = collision_rate(record);
  long shaped = 0;
  long infeasible = 0;
  for (const auto& d : record.diagnostics) {
    shaped += d.shaped_count;
    infeasible += d.infeasible_count;
  }
  j["shaped_draws"] = shaped;
  j["infeasible_draws"] = infeasible;
  return j;
}

}  // namespace

ojson trial_summary_json(const std::vector<TrialRecord>& records,
                         const ExperimentConfig& cfg) {
  ojson j;
  j["version"] = kVersionString;
  j["config"] = config_to_json(cfg);
  ojson trials = ojson::array();
  for (const auto& r : records) trials.push_back(record_json(r));
  j["trials"] = trials;
  return j;
}

ojson benchmark_summary_json(const BenchmarkResult& result, const ExperimentConfig& cfg) {
  ojson j;
  j["version"] = kVersionString;
  j["config"] = config_to_json(cfg);
  ojson table = ojson::array();
  for (const auto& row : result.table.rows) {
    table.push_back({{"algorithm", row.algorithm},
                     {"samples", row.samples},
                     {"mean_collision_rate", row.mean_collision_rate},
                     {"mean_ttf", std::isnan(row.mean_ttf) ? ojson(nullptr)
                                                           : ojson(row.mean_ttf)},
                     {"trials", row.trials},
                     {"finished", row.finished},
                     {"total_collisions", row.total_collisions}});
  }
  j["table"] = table;
  ojson cells = ojson::array();
  for (std::size_t c = 0; c < result.records.size(); ++c) {
    ojson cell;
    cell["algorithm"] = result.table.rows[c].algorithm;
    cell["samples"] = result.table.rows[c].samples;
    ojson trials = ojson::array();
    for (const auto& r : result.records[c]) trials.push_back(record_json(r));
    cell["trials"] = trials;
    cells.push_back(cell);
  }
  j["cells"] = cells;
  return j;
}

ojson samplesize_json(const SampleSizeResult& result, const ExperimentConfig& cfg) {
  auto report_json = [](const ComplexityReport& r) {
    ojson j;
    j["n1"] = r.n1;
    j["n2"] = r.n2;
    j["n"] = r.n;
    j["n2_optimistic"] = r.n2_optimistic;
    j["e1_hat"] = r.stats.e1_hat;
    ojson var = ojson::array();
    for (int i = 0; i < r.stats.var_du.size(); ++i) var.push_back(r.stats.var_du[i]);
    j["var_du"] = var;
    j["batch_size"] = r.stats.n_used;
    return j;
  };
  ojson j;
  j["version"] = kVersionString;
  j["config"] = config_to_json(cfg);
  j["step"] = result.step;
  j["mppi"] = report_json(result.plain);
  j["scbf_mppi"] = report_json(result.scbf);
  j["n2_ratio"] = result.plain.n2 > 0 ? static_cast<double>(result.scbf.n2) /
                                            static_cast<double>(result.plain.n2)
                                      : 0.0;
  return j;
}

void export_results(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg,
                    const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output dir: " + out_dir);
  write_trials_csv(records, build_barriers(cfg), out_dir + "/trials.csv");
  std::ofstream out(out_dir + "/summary.json");
  if (!out) throw std::runtime_error("cannot open for writing: " + out_dir + "/summary.json");
  out << trial_summary_json(records, cfg).dump(2) << '\n';
}

}  // namespace scbf_mppi
