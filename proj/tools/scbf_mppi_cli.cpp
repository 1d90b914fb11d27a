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

// Command-line front end: closed-loop runs, benchmark sweeps, sample-size
// reports, and config-free validation checks.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "scbf_mppi/harness.hpp"
#include "scbf_mppi/numdiff.hpp"
#include "scbf_mppi/stats.hpp"

namespace sm = scbf_mppi;

namespace {

sm::ExperimentConfig load_or_default(const std::string& path) {
  if (path.empty()) return sm::default_config();
  return sm::load_config(path);
}

int run_validate();

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based stochastic optimal control with barrier-shaped "
               "perturbation distributions"};
  app.require_subcommand(0, 1);

  bool print_default = false;
  app.add_flag("--print-default-config", print_default,
               "Print the default experiment config as JSON and exit");

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed_override = 0;
  bool seed_set = false;

  auto* run_cmd = app.add_subcommand("run", "Run closed-loop trials and export results");
  run_cmd->add_option("--config", config_path, "JSON experiment config");
  run_cmd->add_option("--out", out_dir, "Output directory");
  auto* seed_opt = run_cmd->add_option("--seed", seed_override, "Master seed override");
  int run_trials = 0;
  run_cmd->add_option("--trials", run_trials, "Trial count override");

  auto* bench_cmd = app.add_subcommand("benchmark", "Run the benchmark grid");
  std::string grid_spec = "plain:200,plain:500,scbf:200,scbf:500";
  int bench_trials = 0;
  bench_cmd->add_option("--config", config_path, "JSON experiment config");
  bench_cmd->add_option("--grid", grid_spec, "Comma-separated algorithm:samples cells");
  bench_cmd->add_option("--trials", bench_trials, "Trials per cell (default from config)");
  bench_cmd->add_option("--out", out_dir, "Output directory");
  auto* bench_seed_opt = bench_cmd->add_option("--seed", seed_override, "Master seed override");

  auto* size_cmd = app.add_subcommand("samplesize", "Sample-size bounds at a closed-loop step");
  int step_override = -1;
  double eps1 = -1, eps2 = -1, rho1 = -1, rho2 = -1;
  size_cmd->add_option("--config", config_path, "JSON experiment config");
  size_cmd->add_option("--step", step_override, "Measurement step");
  size_cmd->add_option("--eps1", eps1, "Hoeffding error bound");
  size_cmd->add_option("--eps2", eps2, "Chebyshev error bound");
  size_cmd->add_option("--rho1", rho1, "Hoeffding risk probability");
  size_cmd->add_option("--rho2", rho2, "Chebyshev risk probability");
  size_cmd->add_option("--out", out_dir, "Optional output directory");
  bool size_write = false;
  size_cmd->add_flag("--write", size_write, "Also write samplesize.json under --out");

  auto* validate_cmd =
      app.add_subcommand("validate", "Run the config-free invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_default) {
      std::cout << sm::config_to_json(sm::default_config()).dump(2) << '\n';
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 0;
    }

    if (run_cmd->parsed()) {
      sm::ExperimentConfig cfg = load_or_default(config_path);
      if (!seed_opt->empty()) cfg.seed = seed_override;
      (void)seed_set;
      const int trials = run_trials > 0 ? run_trials : 1;
      std::vector<sm::TrialRecord> records;
      for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = sm::derive_key(cfg.seed, 0x747269616cULL,
                                                        static_cast<std::uint64_t>(t));
        records.push_back(sm::run_trial(cfg, trial_seed));
        const auto& r = records.back();
        std::cout << "trial " << t << ": steps=" << r.trajectory.controls.size()
                  << " ttf=" << (r.ttf ? std::to_string(*r.ttf) : "none")
                  << " collisions=" << r.collisions
                  << " rate=" << sm::collision_rate(r) << '\n';
      }
      sm::export_results(records, cfg, out_dir);
      std::cout << "wrote " << out_dir << "/trials.csv and " << out_dir
                << "/summary.json\n";
      return 0;
    }

    if (bench_cmd->parsed()) {
      sm::ExperimentConfig cfg = load_or_default(config_path);
      if (!bench_seed_opt->empty()) cfg.seed = seed_override;
      const int trials = bench_trials > 0 ? bench_trials : cfg.trials;
      const auto grid = sm::parse_grid(grid_spec);
      const sm::BenchmarkResult result = sm::run_benchmark(cfg, grid, trials);
      for (const auto& row : result.table.rows) {
        std::cout << row.algorithm << " K=" << row.samples
                  << " collision_rate=" << row.mean_collision_rate
                  << " mean_ttf=" << row.mean_ttf << " finished=" << row.finished << "/"
                  << row.trials << '\n';
      }
      std::filesystem::create_directories(out_dir);
      for (std::size_t c = 0; c < result.records.size(); ++c) {
        const auto& row = result.table.rows[c];
        const std::string name = out_dir + "/benchmark_" + row.algorithm + "_" +
                                 std::to_string(row.samples) + ".csv";
        sm::write_trials_csv(result.records[c], sm::build_barriers(cfg), name);
      }
      std::ofstream summary(out_dir + "/benchmark_summary.json");
      summary << sm::benchmark_summary_json(result, cfg).dump(2) << '\n';
      std::cout << "wrote " << out_dir << "/benchmark_summary.json\n";
      return 0;
    }

    if (size_cmd->parsed()) {
      sm::ExperimentConfig cfg = load_or_default(config_path);
      if (step_override >= 0) cfg.complexity.step = step_override;
      if (eps1 > 0) cfg.complexity.eps1 = eps1;
      if (eps2 > 0) cfg.complexity.eps2 = eps2;
      if (rho1 > 0) cfg.complexity.rho1 = rho1;
      if (rho2 > 0) cfg.complexity.rho2 = rho2;
      const sm::SampleSizeResult result = sm::run_samplesize(cfg);
      const sm::ojson j = sm::samplesize_json(result, cfg);
      std::cout << j.dump(2) << '\n';
      if (size_write) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_dir + "/samplesize.json");
        out << j.dump(2) << '\n';
      }
      return 0;
    }

    if (validate_cmd->parsed()) return run_validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

namespace {

int check(bool ok, const std::string& name, int& failures) {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << name << '\n';
  if (!ok) ++failures;
  return failures;
}

int run_validate() {
  int failures = 0;

  // barrier gradient/Hessian consistency against finite differences
  {
    const auto barriers = sm::narrow_passage_barriers(1.0, 1.0);
    sm::NoiseStream rng(sm::derive_key(7, 0xA11DA7EULL, 0));
    bool ok = true;
    for (int k = 0; k < 100; ++k) {
      Eigen::Vector3d x(4.0 * rng.uniform(), 2.0 * rng.uniform() - 0.5,
                        2.0 * rng.uniform() - 1.0);
      for (const auto& bf : barriers) {
        ok = ok && sm::gradient_consistent(bf, x, 1e-4);
        ok = ok && sm::hessian_consistent(bf, x, 1e-3);
      }
    }
    check(ok, "barrier derivatives match finite differences", failures);
  }

  // Schur-complement equivalence of the LMI and the scalar constraint
  {
    sm::NoiseStream rng(sm::derive_key(11, 0xFEA51B1E, 0));
    bool ok = true;
    for (int k = 0; k < 1000 && ok; ++k) {
      const int m = 1 + static_cast<int>(rng.uniform() * 4.0);
      sm::ConstraintCoeffs c;
      c.A = rng.normal_vector(m).transpose();
      c.b = 2.0 * rng.normal();
      sm::GaussianDist dist;
      dist.mean = rng.normal_vector(m);
      dist.factor = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) dist.factor(i, i) = std::abs(rng.normal());
      sm::SafetyParams params = sm::make_safety_params(0.003);
      ok = sm::lmi_feasible(dist, c, params) ==
           sm::constraint_satisfied(dist, c, params);
    }
    check(ok, "LMI feasibility matches the scalar variance form", failures);
  }

  // weight normalization and baseline-shift invariance
  {
    sm::NoiseStream rng(sm::derive_key(13, 0x57E19, 0));
    std::vector<double> costs(64);
    for (auto& c : costs) c = 10.0 * rng.uniform();
    const auto w1 = sm::compute_weights(costs, 0.7);
    for (auto& c : costs) c += 123.456;
    const auto w2 = sm::compute_weights(costs, 0.7);
    const bool ok = std::abs(w1.weights.sum() - 1.0) < 1e-12 &&
                    (w1.weights - w2.weights).lpNorm<Eigen::Infinity>() < 1e-12;
    check(ok, "softmax weights normalized and shift-invariant", failures);
  }

  // pure-diffusion increment moments
  {
    const auto model = sm::unicycle_model(1.0);
    const double dt = 0.05;
    const int n = 100000;
    Eigen::Vector3d sums = Eigen::Vector3d::Zero();
    Eigen::Vector3d sq = Eigen::Vector3d::Zero();
    const Eigen::Vector3d x0(0.0, 0.0, 0.0);
    const Eigen::Vector2d u(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
      sm::NoiseStream rng(sm::derive_key(17, 0xD1FF, i));
      const Eigen::Vector3d dx = sm::em_step(model, x0, u, dt, rng.normal_vector(3)) - x0;
      sums += dx;
      sq += dx.cwiseAbs2();
    }
    bool ok = true;
    for (int a = 0; a < 3; ++a) {
      const double var = sq[a] / n - (sums[a] / n) * (sums[a] / n);
      ok = ok && std::abs(var - dt) / dt < 0.05;
    }
    check(ok, "Euler-Maruyama diffusion variance within 5%", failures);
  }

  std::cout << (failures == 0 ? "all checks passed" : "checks FAILED") << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace
