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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scbf_mppi/mppi.hpp"
#include "scbf_mppi/stats.hpp"

using namespace scbf_mppi;

namespace {

MppiConfig small_config(ControlMode mode, std::uint64_t seed) {
  MppiConfig cfg;
  cfg.samples = 64;
  cfg.horizon = 10;
  cfg.dt = 0.05;
  cfg.temperature = 1.0;
  cfg.nominal_sigma = Eigen::Vector2d(0.75, 0.75);
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

MppiController passage_controller(ControlMode mode, std::uint64_t seed,
                                  double sigma_scale = 0.05, double width = 1.0,
                                  Eigen::Vector2d goal = {4.0, 0.5},
                                  MppiConfig* out_cfg = nullptr) {
  const auto model = unicycle_model(sigma_scale);
  const auto cost = make_cost_spec(goal, 2);
  const auto barriers = narrow_passage_barriers(width, 1.0);
  const auto safety = make_safety_params(0.003);
  MppiConfig cfg = small_config(mode, seed);
  if (out_cfg) *out_cfg = cfg;
  return MppiController(model, cost, barriers, safety, cfg);
}

}  // namespace

TEST_CASE("weights: symmetry, dominance, hand value") {
  const auto uniform = compute_weights(std::vector<double>{3.0, 3.0, 3.0, 3.0}, 1.0);
  for (int i = 0; i < 4; ++i) CHECK(uniform.weights[i] == doctest::Approx(0.25));

  const auto dominant = compute_weights(std::vector<double>{0.0, 1e9}, 1.0);
  CHECK(dominant.weights[0] == doctest::Approx(1.0));
  CHECK(dominant.weights[1] == doctest::Approx(0.0));

  const auto pair = compute_weights(std::vector<double>{1.0, 2.0}, 1.0);
  CHECK(pair.weights[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(pair.weights[1] == doctest::Approx(std::exp(-1.0) / (1.0 + std::exp(-1.0))));
}

TEST_CASE("weights: baseline shift invariance and normalization") {
  NoiseStream rng(derive_key(31, 0));
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> costs(50);
    for (auto& c : costs) c = 100.0 * rng.uniform();
    const auto w1 = compute_weights(costs, 0.7);
    CHECK(std::abs(w1.weights.sum() - 1.0) <= 1e-12);
    CHECK(w1.weights.minCoeff() >= 0.0);
    CHECK(w1.weights.allFinite());
    const double c = 1000.0 * (rng.uniform() - 0.5);
    for (auto& s : costs) s += c;
    const auto w2 = compute_weights(costs, 0.7);
    CHECK((w1.weights - w2.weights).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("schedule update convex combinations") {
  ControlSchedule schedule;
  schedule.inputs = {Eigen::Vector2d(1.0, 2.0)};
  RolloutBatch batch;
  batch.trajectories.resize(2);
  batch.trajectories[0].perturbations = {Eigen::Vector2d(2.0, 0.0)};
  batch.trajectories[1].perturbations = {Eigen::Vector2d(0.0, 2.0)};

  SUBCASE("identical perturbations shift by themselves") {
    batch.trajectories[1].perturbations = {Eigen::Vector2d(2.0, 0.0)};
    WeightVector w;
    w.weights = Eigen::Vector2d(0.3, 0.7);
    const auto updated = update_schedule(schedule, batch, w);
    CHECK(updated.inputs[0].isApprox(Eigen::Vector2d(3.0, 2.0)));
  }
  SUBCASE("one-hot weights select a sample") {
    WeightVector w;
    w.weights = Eigen::Vector2d(0.0, 1.0);
    const auto updated = update_schedule(schedule, batch, w);
    CHECK(updated.inputs[0].isApprox(Eigen::Vector2d(1.0, 4.0)));
  }
  SUBCASE("even weights average") {
    WeightVector w;
    w.weights = Eigen::Vector2d(0.5, 0.5);
    const auto updated = update_schedule(schedule, batch, w);
    CHECK(updated.inputs[0].isApprox(Eigen::Vector2d(2.0, 3.0)));
  }
}

TEST_CASE("horizon shift") {
  const Eigen::Vector2d a(1, 0), b(2, 0), c(3, 0), u0 = Eigen::Vector2d::Zero();
  SUBCASE("length one") {
    ControlSchedule s;
    s.inputs = {a};
    const auto shifted = shift_horizon(s, u0);
    REQUIRE(shifted.inputs.size() == 1);
    CHECK(shifted.inputs[0] == u0);
  }
  SUBCASE("rotation with append") {
    ControlSchedule s;
    s.inputs = {a, b, c};
    const auto once = shift_horizon(s, u0);
    CHECK(once.inputs[0] == b);
    CHECK(once.inputs[1] == c);
    CHECK(once.inputs[2] == u0);
    const auto twice = shift_horizon(once, u0);
    CHECK(twice.inputs[0] == c);
    CHECK(twice.inputs[1] == u0);
    CHECK(twice.inputs[2] == u0);
  }
}

TEST_CASE("sample_perturbation plain and slack modes") {
  const auto safety = make_safety_params(0.003);
  SUBCASE("degenerate nominal always returns zero") {
    const auto nominal =
        make_diagonal_gaussian(Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero());
    NoiseStream rng(derive_key(32, 0));
    for (int k = 0; k < 10; ++k) {
      const auto r = sample_perturbation(ControlMode::kPlain, nominal, {}, safety,
                                         1e-8, rng);
      CHECK(r.du.isZero());
    }
  }
  SUBCASE("slack constraints leave the distribution nominal") {
    const auto nominal =
        make_diagonal_gaussian(Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 1.0));
    ConstraintCoeffs slack;
    slack.A = Eigen::RowVector2d(1.0, 0.0);
    slack.b = -100.0;
    NoiseStream rng(derive_key(32, 1));
    const auto r = sample_perturbation(ControlMode::kScbf, nominal, {slack}, safety,
                                       1e-8, rng);
    CHECK_FALSE(r.shaped);
    CHECK(r.used.mean == nominal.mean);
    CHECK(r.used.factor == nominal.factor);
  }
}

TEST_CASE("shaped sampling satisfies the chance constraint near a wall") {
  // state just below the upper wall h2; std-dev form so the quantile is exact
  const auto model = unicycle_model(1.0);
  const auto barriers = narrow_passage_barriers(1.0, 1.0);
  const auto safety = make_safety_params(0.003, std::nullopt, AlphaForm::kStdDev);
  const Eigen::Vector3d x(0.0, 0.95, 0.0);
  std::vector<ConstraintCoeffs> constraints;
  for (const auto& bf : barriers) constraints.push_back(constraint_coeffs(model, bf, x));
  const auto nominal =
      make_diagonal_gaussian(Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 1.0));

  NoiseStream rng(derive_key(32, 2));
  const long n = 100000;
  long ok[2] = {0, 0};
  bool shaped_seen = false;
  for (long k = 0; k < n; ++k) {
    const auto r = sample_perturbation(ControlMode::kScbf, nominal, constraints, safety,
                                       1e-8, rng);
    shaped_seen = shaped_seen || r.shaped;
    for (int c = 0; c < 2; ++c) {
      if (constraints[c].A.dot(r.du) >= constraints[c].b) ++ok[c];
    }
  }
  CHECK(shaped_seen);
  const double delta = 0.003;
  const double slack = 3.0 * std::sqrt(delta * (1.0 - delta) / n);
  for (int c = 0; c < 2; ++c) {
    const double rate = 1.0 - static_cast<double>(ok[c]) / n;
    CHECK(rate <= delta + slack);
  }
}

TEST_CASE("batch evaluation determinism and worker independence") {
  MppiController a = passage_controller(ControlMode::kScbf, 77);
  const Eigen::Vector3d x0(0.5, 0.4, 0.1);
  auto batch1 = a.evaluate_batch(x0, 0);
  auto batch2 = a.evaluate_batch(x0, 0);
  REQUIRE(batch1.costs.size() == batch2.costs.size());
  for (std::size_t i = 0; i < batch1.costs.size(); ++i) {
    CHECK(batch1.costs[i] == batch2.costs[i]);  // bitwise
  }

  // different worker counts must not change anything
  const auto model = unicycle_model(0.05);
  const auto cost = make_cost_spec(Eigen::Vector2d(4.0, 0.5), 2);
  const auto barriers = narrow_passage_barriers(1.0, 1.0);
  const auto safety = make_safety_params(0.003);
  MppiConfig cfg1 = small_config(ControlMode::kScbf, 77);
  cfg1.workers = 1;
  MppiConfig cfg4 = cfg1;
  cfg4.workers = 4;
  MppiController c1(model, cost, barriers, safety, cfg1);
  MppiController c4(model, cost, barriers, safety, cfg4);
  const auto b1 = c1.evaluate_batch(x0, 3);
  const auto b4 = c4.evaluate_batch(x0, 3);
  for (std::size_t i = 0; i < b1.costs.size(); ++i) {
    CHECK(b1.costs[i] == b4.costs[i]);
    for (std::size_t t = 0; t < b1.trajectories[i].states.size(); ++t) {
      CHECK(b1.trajectories[i].states[t] == b4.trajectories[i].states[t]);
    }
  }
}

TEST_CASE("deterministic single-sample batch equals direct evaluation") {
  const auto model = unicycle_model(0.0);
  const auto cost = make_cost_spec(Eigen::Vector2d(4.0, 0.5), 2);
  const auto barriers = narrow_passage_barriers(1.0, 1.0);
  const auto safety = make_safety_params(0.003);
  MppiConfig cfg = small_config(ControlMode::kPlain, 5);
  cfg.samples = 1;
  cfg.nominal_sigma = Eigen::Vector2d::Zero();
  MppiController ctl(model, cost, barriers, safety, cfg);
  const Eigen::Vector3d x0(0.0, 0.5, 0.0);
  const auto batch = ctl.evaluate_batch(x0, 0);
  REQUIRE(batch.costs.size() == 1);

  // zero sigma and zero perturbations: x never moves (zero drift, zero input)
  double expected = 0.0;
  for (int t = 0; t < cfg.horizon; ++t) {
    expected += state_cost(cost, x0, true);
  }
  CHECK(batch.costs[0] == doctest::Approx(expected));
  CHECK(batch.trajectories[0].states.back().isApprox(x0));
}

TEST_CASE("batch costs stay nonnegative in the documented regime") {
  // nu = 1, zero schedule, standard cost: S >= 0 for every sample
  MppiController ctl = passage_controller(ControlMode::kPlain, 88);
  const auto batch = ctl.evaluate_batch(Eigen::Vector3d(0.0, 0.5, 0.0), 0);
  for (double c : batch.costs) CHECK(c >= 0.0);
}

TEST_CASE("scbf shrinks perturbation variance near walls") {
  // start close to the lower wall so shaping engages
  MppiConfig cfg;
  MppiController ctl = passage_controller(ControlMode::kScbf, 99, 0.05, 1.0,
                                          {4.0, 0.5}, &cfg);
  ctl.step(Eigen::Vector3d(0.0, 0.08, 0.0));
  const auto& diag = ctl.last_diagnostics();
  CHECK(diag.shaped_count > 0);
  const double kt = static_cast<double>(cfg.samples) * cfg.horizon;
  for (int j = 0; j < 2; ++j) {
    const double nominal_var = cfg.nominal_sigma[j] * cfg.nominal_sigma[j];
    CHECK(diag.perturbation_variance[j] <=
          nominal_var + 3.0 * std::sqrt(2.0 / kt) * nominal_var);
  }
}

TEST_CASE("plain equals scbf when constraints never activate") {
  // a huge passage: every constraint stays slack across the horizon
  MppiController plain =
      passage_controller(ControlMode::kPlain, 123, 0.05, 100.0, {4.0, 50.0});
  MppiController scbf =
      passage_controller(ControlMode::kScbf, 123, 0.05, 100.0, {4.0, 50.0});
  const Eigen::Vector3d x0(0.0, 50.0, 0.0);
  const auto bp = plain.evaluate_batch(x0, 0);
  const auto bs = scbf.evaluate_batch(x0, 0);
  for (std::size_t i = 0; i < bp.costs.size(); ++i) {
    CHECK(bp.costs[i] == bs.costs[i]);
    for (std::size_t t = 0; t < bp.trajectories[i].perturbations.size(); ++t) {
      CHECK(bp.trajectories[i].perturbations[t] == bs.trajectories[i].perturbations[t]);
    }
  }
  for (const auto& flags : bs.shaped_flags) {
    for (bool f : flags) CHECK_FALSE(f);
  }
}

TEST_CASE("control step composition") {
  SUBCASE("zero noise and zero sigma returns the nominal schedule head") {
    const auto model = unicycle_model(0.0);
    const auto cost = make_cost_spec(Eigen::Vector2d(4.0, 0.5), 2);
    const auto barriers = narrow_passage_barriers(1.0, 1.0);
    MppiConfig cfg = small_config(ControlMode::kPlain, 1);
    cfg.nominal_sigma = Eigen::Vector2d::Zero();
    MppiController ctl(model, cost, barriers, make_safety_params(0.003), cfg);
    const auto u = ctl.step(Eigen::Vector3d(0.0, 0.5, 0.0));
    CHECK(u.isZero());
  }
  SUBCASE("fixed seed reproduces the control") {
    MppiController a = passage_controller(ControlMode::kScbf, 2025);
    MppiController b = passage_controller(ControlMode::kScbf, 2025);
    const Eigen::Vector3d x0(0.0, 0.5, 0.0);
    const auto ua = a.step(x0);
    const auto ub = b.step(x0);
    CHECK(ua == ub);
    // and across consecutive steps
    CHECK(a.step(x0) == b.step(x0));
  }
  SUBCASE("controller drives east toward the goal") {
    int positive = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      MppiController ctl = passage_controller(ControlMode::kPlain, 3000 + s);
      const auto u = ctl.step(Eigen::Vector3d(0.0, 0.5, 0.0));
      if (u[0] > 0.0) ++positive;
    }
    CHECK(positive >= 19);  // >= 95%
  }
}

TEST_CASE("diagnostics are populated") {
  MppiController ctl = passage_controller(ControlMode::kScbf, 17);
  ctl.step(Eigen::Vector3d(0.0, 0.5, 0.0));
  const auto& d = ctl.last_diagnostics();
  CHECK(d.e1_hat > 0.0);
  CHECK(d.e1_hat <= 1.0);
  CHECK(d.weight_entropy >= 0.0);
  CHECK(d.perturbation_variance.size() == 2);
  CHECK(ctl.last_batch().costs.size() == 64);
}

TEST_CASE("importance ratio changes weights only when shaping occurs") {
  MppiConfig cfg;
  MppiController base = passage_controller(ControlMode::kScbf, 41, 0.05, 1.0,
                                           {4.0, 0.5}, &cfg);
  const auto model = unicycle_model(0.05);
  const auto cost = make_cost_spec(Eigen::Vector2d(4.0, 0.5), 2);
  const auto barriers = narrow_passage_barriers(1.0, 1.0);
  cfg.importance_ratio = true;
  MppiController corrected(model, cost, barriers, make_safety_params(0.003), cfg);
  // near a wall shaping triggers, so the correction must alter costs
  const Eigen::Vector3d near_wall(0.0, 0.05, 0.0);
  const auto b0 = base.evaluate_batch(near_wall, 0);
  const auto b1 = corrected.evaluate_batch(near_wall, 0);
  bool any_different = false;
  for (std::size_t i = 0; i < b0.costs.size(); ++i) {
    if (b0.costs[i] != b1.costs[i]) any_different = true;
  }
  CHECK(any_different);
}

TEST_CASE("shared shaping mode stays deterministic") {
  MppiConfig cfg;
  passage_controller(ControlMode::kScbf, 43, 0.05, 1.0, {4.0, 0.5}, &cfg);
  cfg.shared_shaping = true;
  const auto model = unicycle_model(0.05);
  const auto cost = make_cost_spec(Eigen::Vector2d(4.0, 0.5), 2);
  const auto barriers = narrow_passage_barriers(1.0, 1.0);
  MppiController a(model, cost, barriers, make_safety_params(0.003), cfg);
  MppiController b(model, cost, barriers, make_safety_params(0.003), cfg);
  const Eigen::Vector3d x0(0.0, 0.15, 0.0);
  const auto ua = a.step(x0);
  const auto ub = b.step(x0);
  CHECK(ua == ub);
}

TEST_CASE("config validation") {
  const auto model = unicycle_model(0.05);
  const auto cost = make_cost_spec(Eigen::Vector2d(4.0, 0.5), 2);
  const auto barriers = narrow_passage_barriers(1.0, 1.0);
  const auto safety = make_safety_params(0.003);
  MppiConfig cfg = small_config(ControlMode::kPlain, 1);
  SUBCASE("bad sample count") {
    cfg.samples = 0;
    CHECK_THROWS_AS(MppiController(model, cost, barriers, safety, cfg),
                    std::invalid_argument);
  }
  SUBCASE("bad sigma dimension") {
    cfg.nominal_sigma = Eigen::Vector3d::Zero();
    CHECK_THROWS_AS(MppiController(model, cost, barriers, safety, cfg),
                    std::invalid_argument);
  }
  SUBCASE("negative sigma") {
    cfg.nominal_sigma = Eigen::Vector2d(-0.1, 0.5);
    CHECK_THROWS_AS(MppiController(model, cost, barriers, safety, cfg),
                    std::invalid_argument);
  }
}
