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

#include "scbf_mppi/cost.hpp"
#include "scbf_mppi/rng.hpp"

using namespace scbf_mppi;

namespace {

CostSpec passage_cost() { return make_cost_spec(Eigen::Vector2d(4.0, 0.5), 2); }

Trajectory make_traj(const std::vector<Eigen::Vector3d>& states,
                     const std::vector<Eigen::Vector2d>& controls,
                     const std::vector<Eigen::Vector2d>& perturbations) {
  Trajectory t;
  for (const auto& s : states) t.states.push_back(s);
  for (const auto& c : controls) t.controls.push_back(c);
  for (const auto& p : perturbations) t.perturbations.push_back(p);
  t.dt = 0.05;
  return t;
}

}  // namespace

TEST_CASE("state cost at goal and with penalty") {
  const CostSpec spec = passage_cost();
  CHECK(state_cost(spec, Eigen::Vector3d(4.0, 0.5, 1.3), true) == 0.0);
  CHECK(state_cost(spec, Eigen::Vector3d(0.0, 0.5, 0.0), true) == doctest::Approx(16.0));
  CHECK(state_cost(spec, Eigen::Vector3d(0.0, 0.5, 0.0), false) ==
        doctest::Approx(1016.0));
}

TEST_CASE("running cost control terms") {
  CostSpec spec = passage_cost();
  const Eigen::Vector3d at_goal(4.0, 0.5, 0.0);
  const Eigen::Vector2d zero2 = Eigen::Vector2d::Zero();

  SUBCASE("zero controls leave only q") {
    CHECK(running_cost(spec, Eigen::Vector3d(0, 0.5, 0), true, zero2, zero2) ==
          doctest::Approx(16.0));
  }
  SUBCASE("nu = 1 cancels the quadratic perturbation term") {
    spec.variance_ratio = 1.0;
    const Eigen::Vector2d eps(0.7, -0.3);
    CHECK(running_cost(spec, at_goal, true, zero2, eps) == doctest::Approx(0.0));
  }
  SUBCASE("hand-evaluated term sum") {
    spec.variance_ratio = 2.0;
    const Eigen::Vector2d v(1.0, 0.0);
    const Eigen::Vector2d eps(1.0, 0.0);
    // (1 - 1/2)/2 * 1 + 1 + 0.5
    CHECK(running_cost(spec, at_goal, true, v, eps) == doctest::Approx(1.75));
  }
}

TEST_CASE("trajectory cost composition") {
  CostSpec spec = passage_cost();

  SUBCASE("zero-length control sequence returns the terminal cost") {
    spec.terminal = [](const StateVec& x) { return 2.0 * x[0]; };
    const auto traj = make_traj({{1.0, 0.5, 0.0}}, {}, {});
    CHECK(trajectory_cost(spec, traj, {true}) == doctest::Approx(2.0));
  }

  SUBCASE("all stage costs zero") {
    const auto traj = make_traj(
        {{0, 0.5, 0}, {4.0, 0.5, 0}, {4.0, 0.5, 0}},
        {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()},
        {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()});
    CHECK(trajectory_cost(spec, traj, {true, true, true}) == 0.0);
  }

  SUBCASE("terminal plus two equal stages") {
    spec.terminal = [](const StateVec&) { return 5.0; };
    const double d = std::sqrt(3.0);  // q = 3 at distance sqrt(3)
    const Eigen::Vector3d mid(4.0 - d, 0.5, 0.0);
    const auto traj = make_traj({{0, 0.5, 0}, mid, mid},
                                {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()},
                                {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()});
    CHECK(trajectory_cost(spec, traj, {true, true, true}) == doctest::Approx(11.0));
  }

  SUBCASE("safeness length must match states") {
    const auto traj = make_traj({{0, 0.5, 0}, {0.1, 0.5, 0}}, {Eigen::Vector2d::Zero()},
                                {Eigen::Vector2d::Zero()});
    CHECK_THROWS_AS(trajectory_cost(spec, traj, {true}), std::invalid_argument);
  }
}

TEST_CASE("additivity of stage costs") {
  CostSpec spec = passage_cost();
  spec.variance_ratio = 1.7;
  spec.terminal = [](const StateVec& x) { return x.squaredNorm(); };
  NoiseStream rng(derive_key(101, 0));
  for (int rep = 0; rep < 20; ++rep) {
    const int T = 6;
    std::vector<Eigen::Vector3d> states;
    std::vector<Eigen::Vector2d> controls, perturbations;
    std::vector<bool> safeness;
    for (int t = 0; t <= T; ++t) {
      states.emplace_back(rng.normal(), rng.normal(), rng.normal());
      safeness.push_back(rng.uniform() > 0.3);
    }
    for (int t = 0; t < T; ++t) {
      controls.emplace_back(rng.normal(), rng.normal());
      perturbations.emplace_back(rng.normal(), rng.normal());
    }
    const auto traj = make_traj(states, controls, perturbations);
    double manual = spec.terminal(states.back());
    for (int t = 0; t < T; ++t) {
      manual += running_cost(spec, states[t + 1], safeness[t + 1], controls[t],
                             perturbations[t]);
    }
    CHECK(trajectory_cost(spec, traj, safeness) == manual);  // exact
  }
}

TEST_CASE("penalty monotonicity: one flipped flag adds exactly the penalty") {
  CostSpec spec = passage_cost();
  NoiseStream rng(derive_key(102, 0));
  const int T = 5;
  std::vector<Eigen::Vector3d> states;
  std::vector<Eigen::Vector2d> controls, perturbations;
  for (int t = 0; t <= T; ++t) states.emplace_back(rng.normal(), rng.normal(), 0.0);
  for (int t = 0; t < T; ++t) {
    controls.emplace_back(rng.normal(), rng.normal());
    perturbations.emplace_back(rng.normal(), rng.normal());
  }
  const auto traj = make_traj(states, controls, perturbations);
  std::vector<bool> all_safe(T + 1, true);
  const double base = trajectory_cost(spec, traj, all_safe);
  for (int flip = 1; flip <= T; ++flip) {  // step t reads flag t+1
    std::vector<bool> flags = all_safe;
    flags[flip] = false;
    CHECK(trajectory_cost(spec, traj, flags) - base ==
          doctest::Approx(spec.obstacle_penalty));
  }
}

TEST_CASE("nonnegativity in the documented regime") {
  // nu >= 1, R psd, zero mean schedule: S >= 0 on random rollouts
  CostSpec spec = passage_cost();
  spec.variance_ratio = 1.3;
  NoiseStream rng(derive_key(103, 0));
  for (int rep = 0; rep < 50; ++rep) {
    const int T = 8;
    std::vector<Eigen::Vector3d> states;
    std::vector<Eigen::Vector2d> controls(T, Eigen::Vector2d::Zero());
    std::vector<Eigen::Vector2d> perturbations;
    std::vector<bool> safeness;
    for (int t = 0; t <= T; ++t) {
      states.emplace_back(4.0 * rng.uniform(), rng.uniform(), rng.normal());
      safeness.push_back(rng.uniform() > 0.5);
    }
    for (int t = 0; t < T; ++t) perturbations.emplace_back(rng.normal(), rng.normal());
    const auto traj = make_traj(states, controls, perturbations);
    CHECK(trajectory_cost(spec, traj, safeness) >= 0.0);
  }
}
