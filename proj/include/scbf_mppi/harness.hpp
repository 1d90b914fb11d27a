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

#include <optional>
#include <string>
#include <vector>

#include "scbf_mppi/complexity.hpp"
#include "scbf_mppi/config.hpp"
#include "scbf_mppi/mppi.hpp"

namespace scbf_mppi {

extern const char* const kVersionString;

/// One closed-loop navigation trial. `trajectory.controls` holds the executed
/// inputs; `safeness` flags the post-step states (one entry per executed
/// step). A trial stops at the first entry into the goal vicinity or after
/// max_steps, never on a collision.
struct TrialRecord {
  Trajectory trajectory;
  std::optional<int> ttf;  // steps until first vicinity entry
  long collisions = 0;
  std::vector<bool> safeness;
  std::vector<StepDiagnostics> diagnostics;
};

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed);

/// Unsafe visited states divided by visited states (post-step states only;
/// 0 for a zero-step trial).
double collision_rate(const TrialRecord& record);

/// First state index within `radius` of the goal (the start state counts as
/// index 0); empty when the goal is never reached.
std::optional<int> time_to_finish(const TrialRecord& record, const Eigen::Vector2d& goal,
                                  double radius);

struct BenchmarkCell {
  ControlMode mode = ControlMode::kPlain;
  int samples = 0;
};

struct BenchmarkRow {
  std::string algorithm;
  int samples = 0;
  double mean_collision_rate = 0.0;
  double mean_ttf = 0.0;  // over finishing trials
  int trials = 0;
  int finished = 0;
  long total_collisions = 0;
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
};

struct BenchmarkResult {
  BenchmarkTable table;
  // records[cell][trial], aligned with the grid order
  std::vector<std::vector<TrialRecord>> records;
  std::vector<BenchmarkCell> grid;
};

/// Runs `trials` trials per grid cell with seeds derived from cfg.seed.
/// Trial seeds are shared across cells so algorithm comparisons are paired.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg,
                              const std::vector<BenchmarkCell>& grid, int trials);

std::vector<BenchmarkCell> parse_grid(const std::string& spec);

struct SampleSizeResult {
  ComplexityReport plain;
  ComplexityReport scbf;
  int step = 0;
};

/// Runs one closed-loop trial per mode up to the measurement step, then feeds
/// that step's batch (baseline-shifted costs, all perturbation draws) into
/// the sample bounds.
SampleSizeResult run_samplesize(const ExperimentConfig& cfg);

/// Per-step CSV: trial,step,x,y,theta,v,omega,h1,h2,safe. Row t holds the
/// state after step t (1-based) and the input executed during it.
void write_trials_csv(const std::vector<TrialRecord>& records,
                      const std::vector<BarrierFunction>& barriers,
                      const std::string& path);

ojson trial_summary_json(const std::vector<TrialRecord>& records,
                         const ExperimentConfig& cfg);

ojson benchmark_summary_json(const BenchmarkResult& result, const ExperimentConfig& cfg);

ojson samplesize_json(const SampleSizeResult& result, const ExperimentConfig& cfg);

/// Writes the per-step CSV plus a summary JSON under `out_dir`.
void export_results(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg,
                    const std::string& out_dir);

}  // namespace scbf_mppi
