// Copyright 2026 The mmil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "mmil/builders.h"
#include "mmil/mdp.h"

namespace mmil {
namespace {

constexpr double kFloatTolerance = 1e-12;

// Expected sum of g from (t, s, a) onward by explicit path enumeration.
double BruteForceQ(const TabularMdp& mdp, const TimedPolicy& pi,
                   const StateActionTable& g, int t, int s, int a) {
  double total = g(s, a);
  if (t + 1 >= mdp.horizon) return total;
  for (int sp = 0; sp < mdp.n_states; ++sp) {
    double p = mdp.P(s, a, sp);
    if (p == 0.0) continue;
    for (int ap = 0; ap < mdp.n_actions; ++ap) {
      double q = pi(t + 1, sp, ap);
      if (q == 0.0) continue;
      total += p * q * BruteForceQ(mdp, pi, g, t + 1, sp, ap);
    }
  }
  return total;
}

TEST_CASE("loop expert values") {
  BuiltMdp loop3 = BuildLoop(3);
  CHECK(std::abs(PolicyValue(loop3.mdp, loop3.expert) - 2.0) < kFloatTolerance);
  BuiltMdp loop2 = BuildLoop(2);
  CHECK(std::abs(PolicyValue(loop2.mdp, loop2.expert) - 1.0) < kFloatTolerance);
  CHECK_THROWS_AS(BuildLoop(1), std::invalid_argument);
  for (int T : {2, 5, 9}) {
    BuiltMdp b = BuildLoop(T);
    CHECK_NOTHROW(b.mdp.Validate());
  }
}

TEST_CASE("loop occupancy at t=2 sits on the stay action in s1") {
  BuiltMdp loop = BuildLoop(4);
  OccupancyMeasure occ = Occupancy(loop.mdp, loop.expert);
  CHECK(std::abs(occ.d(1, 1, 1) - 1.0) < kFloatTolerance);
}

TEST_CASE("cliff construction") {
  for (int T : {2, 4, 8}) {
    BuiltMdp cliff = BuildCliff(T);
    CHECK(std::abs(PolicyValue(cliff.mdp, cliff.expert)) < kFloatTolerance);
    TimedPolicy drop = CliffDropPolicy(T, 1.0);
    double gap = PolicyValue(cliff.mdp, cliff.expert) -
                 PolicyValue(cliff.mdp, drop);
    CHECK(std::abs(gap / cliff.reward_scale - T) < 1e-12);
    CHECK(std::abs(PolicyValue(cliff.mdp, CliffDropPolicy(T, 0.0)) -
                   PolicyValue(cliff.mdp, cliff.expert)) < kFloatTolerance);
  }
  CHECK_THROWS_AS(BuildCliff(1), std::invalid_argument);
}

TEST_CASE("cliff expert Q at the drop is -T under the unscaled cost") {
  const int T = 6;
  BuiltMdp cliff = BuildCliff(T);
  StateActionTable reward = CliffCost(T);
  for (double& x : reward.data) x = -x;
  ValueTables vt = QValues(cliff.mdp, cliff.expert, reward);
  CHECK(std::abs(vt.q(0, 0, 1) + T) < kFloatTolerance);
}

TEST_CASE("unicycle closed form") {
  BuiltMdp uni = BuildUnicycle(3);
  double gap = PolicyValue(uni.mdp, uni.expert) -
               PolicyValue(uni.mdp, UnicycleFlipPolicy(3, 0.5));
  CHECK(std::abs(gap - 1.25) < kFloatTolerance);
  for (int T : {1, 4, 10}) {
    for (double eps : {0.0, 0.1, 0.37}) {
      BuiltMdp u = BuildUnicycle(T);
      double closed = 0.0;
      for (int t = 1; t <= T; ++t) {
        closed += eps * std::pow(1.0 - eps, t - 1) * (T - t);
      }
      double g = PolicyValue(u.mdp, u.expert) -
                 PolicyValue(u.mdp, UnicycleFlipPolicy(T, eps));
      CHECK(std::abs(g - closed) < 1e-12);
    }
  }
}

TEST_CASE("tree size, expert path and brute-force gap") {
  BuiltMdp tree = BuildTree(2, 4);
  CHECK(tree.mdp.n_states == 31);
  OccupancyMeasure occ = Occupancy(tree.mdp, tree.expert);
  int node = 0;
  for (int t = 0; t < 4; ++t) {
    CHECK(std::abs(occ.StateMarginal()(t, node) - 1.0) < kFloatTolerance);
    node = node * 2 + 2;
  }
  TimedPolicy uniform = TimedPolicy::Uniform(4, 31, 2);
  double dp_gap = PolicyValue(tree.mdp, tree.expert) -
                  PolicyValue(tree.mdp, uniform);
  // All 16 action sequences are equally likely under the uniform learner.
  double brute = 0.0;
  for (int seq = 0; seq < 16; ++seq) {
    int s = 0;
    double ret = 0.0;
    for (int t = 0; t < 4; ++t) {
      int a = (seq >> t) & 1;
      ret += tree.mdp.reward(s, a);
      s = s * 2 + 1 + a;
    }
    brute += ret / 16.0;
  }
  double brute_gap = PolicyValue(tree.mdp, tree.expert) - brute;
  CHECK(std::abs(dp_gap - brute_gap) < kFloatTolerance);
  CHECK_THROWS_AS(BuildTree(2, 30), ResourceLimitError);
  CHECK_THROWS_AS(BuildTree(1, 3), std::invalid_argument);
}

TEST_CASE("forest grid modes") {
  ForestGridSpec spec;
  spec.width = 5;
  spec.length = 8;
  spec.trees = {{4, 2}};
  spec.start_column = 2;
  ForestGrid grid = BuildForestGrid(spec);
  CHECK(std::abs(PolicyValue(grid.built.mdp, grid.built.expert) - 8.0) < 1e-12);
  CHECK(std::abs(PolicyValue(grid.built.mdp, MeanActionPolicy(grid)) - 4.0) <
        1e-12);
  spec.mode_count = 1;
  ForestGrid single = BuildForestGrid(spec);
  CHECK(std::abs(PolicyValue(single.built.mdp, single.built.expert) - 8.0) <
        1e-12);
  ForestGrid def = BuildForestGrid(DefaultForestSpec());
  CHECK(std::abs(PolicyValue(def.built.mdp, def.built.expert) - 12.0) < 1e-12);
  ForestGridSpec bad = spec;
  bad.trees = {{3, 0}, {3, 1}, {3, 2}, {3, 3}, {3, 4}};
  CHECK_THROWS_AS(BuildForestGrid(bad), std::invalid_argument);
  ForestGridSpec blocked = spec;
  blocked.width = 3;
  blocked.start_column = 1;
  blocked.trees = {{1, 0}, {1, 1}, {2, 1}, {2, 2}};
  CHECK_THROWS_AS(BuildForestGrid(blocked), std::invalid_argument);
}

TEST_CASE("occupancy invariants and value identities on random instances") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    int S = 1 + static_cast<int>(rng() % 6), A = 1 + static_cast<int>(rng() % 3);
    int T = 1 + static_cast<int>(rng() % 8);
    TabularMdp mdp = RandomMdp(S, A, T, rng);
    TimedPolicy pi = RandomPolicy(T, S, A, rng);
    OccupancyMeasure occ = Occupancy(mdp, pi);
    for (int t = 0; t < T; ++t) {
      double mass = 0.0;
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) mass += occ.d(t, s, a);
      }
      CHECK(std::abs(mass - 1.0) < kFlowTolerance);
      if (t + 1 < T) {
        for (int sp = 0; sp < S; ++sp) {
          double in = 0.0, out = 0.0;
          for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) in += occ.d(t, s, a) * mdp.P(s, a, sp);
          }
          for (int a = 0; a < A; ++a) out += occ.d(t + 1, sp, a);
          CHECK(std::abs(in - out) < kFlowTolerance);
        }
      }
    }
    CHECK(std::abs(PolicyValue(mdp, pi) - PolicyValueViaQ(mdp, pi)) < 1e-10);
    ValueTables vt = QValues(mdp, pi, mdp.reward);
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        double v = 0.0;
        for (int a = 0; a < A; ++a) v += pi(t, s, a) * vt.q(t, s, a);
        CHECK(std::abs(v - vt.v(t, s)) < 1e-10);
      }
    }
  }
}

TEST_CASE("q values match brute-force path enumeration") {
  std::mt19937_64 rng(5);
  TabularMdp mdp = RandomMdp(4, 2, 5, rng);
  TimedPolicy pi = RandomPolicy(5, 4, 2, rng);
  ValueTables vt = QValues(mdp, pi, mdp.reward);
  for (int t = 0; t < 5; ++t) {
    for (int s = 0; s < 4; ++s) {
      for (int a = 0; a < 2; ++a) {
        CHECK(std::abs(vt.q(t, s, a) - BruteForceQ(mdp, pi, mdp.reward, t, s, a)) <
              1e-9);
      }
    }
  }
  TabularMdp one = RandomMdp(3, 2, 1, rng);
  ValueTables v1 = QValues(one, TimedPolicy::Uniform(1, 3, 2), one.reward);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) CHECK(v1.q(0, s, a) == one.reward(s, a));
  }
}

TEST_CASE("degenerate chain value") {
  TabularMdp mdp(1, 1, 5);
  mdp.P(0, 0, 0) = 1.0;
  mdp.reward(0, 0) = 1.0;
  mdp.initial_dist[0] = 1.0;
  CHECK(std::abs(PolicyValue(mdp, TimedPolicy::Uniform(5, 1, 1)) - 5.0) <
        kFloatTolerance);
}

TEST_CASE("validation errors") {
  BuiltMdp loop = BuildLoop(3);
  TabularMdp broken = loop.mdp;
  broken.P(0, 0, 1) = 0.5;
  CHECK_THROWS_AS(broken.Validate(), std::invalid_argument);
  TabularMdp big = loop.mdp;
  big.reward(0, 0) = 1.5;
  CHECK_THROWS_AS(big.Validate(), std::invalid_argument);
  CHECK_THROWS_AS(Occupancy(loop.mdp, TimedPolicy::Uniform(2, 3, 2)),
                  std::invalid_argument);
  TimedPolicy bad = loop.expert;
  bad(0, 0, 0) = 0.7;
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
}

TEST_CASE("rollouts are deterministic and converge to exact values") {
  BuiltMdp loop = BuildLoop(5);
  std::vector<Trajectory> a = Rollout(loop.mdp, loop.expert, 3, 4);
  std::vector<Trajectory> b = Rollout(loop.mdp, loop.expert, 99, 4);
  for (const Trajectory& tr : a) {
    CHECK(tr.steps == b[0].steps);
    CHECK(tr.steps[0].first == 0);
    for (int t = 1; t < 5; ++t) CHECK(tr.steps[t].first == 1);
  }
  const int T = 4;
  const int n = 100000;
  BuiltMdp cliff = BuildCliff(T);
  TimedPolicy drop = CliffDropPolicy(T, 0.25);
  std::vector<Trajectory> runs = Rollout(cliff.mdp, drop, 2024, n);
  CHECK(Rollout(cliff.mdp, drop, 2024, 10)[7].steps == runs[7].steps);
  double mean = 0.0, sq = 0.0;
  TimedTable counts(T, cliff.mdp.n_states, 2, 0.0);
  for (const Trajectory& tr : runs) {
    double ret = 0.0;
    for (int t = 0; t < T; ++t) {
      auto [s, act] = tr.steps[t];
      ret += cliff.mdp.reward(s, act);
      counts(t, s, act) += 1.0;
    }
    mean += ret;
    sq += ret * ret;
  }
  mean /= n;
  double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - PolicyValue(cliff.mdp, drop)) <= 3.0 * se);
  OccupancyMeasure occ = Occupancy(cliff.mdp, drop);
  for (std::size_t i = 0; i < counts.data.size(); ++i) {
    double p = occ.d.data[i];
    double est = counts.data[i] / n;
    double cell_se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / n);
    CHECK(std::abs(est - p) <= 3.0 * cell_se + 1e-12);
  }
}

TEST_CASE("performance difference residuals") {
  BuiltMdp loop = BuildLoop(6);
  CHECK(PdlResidual(loop.mdp, loop.expert, loop.expert) < 1e-12);
  CHECK(PdlResidual(loop.mdp, loop.expert, TimedPolicy::Uniform(6, 3, 2)) <
        kIdentityTolerance);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 50; ++i) {
    int S = 1 + static_cast<int>(rng() % 6), A = 1 + static_cast<int>(rng() % 3);
    int T = 1 + static_cast<int>(rng() % 8);
    TabularMdp mdp = RandomMdp(S, A, T, rng);
    TimedPolicy p1 = RandomPolicy(T, S, A, rng);
    TimedPolicy p2 = RandomPolicy(T, S, A, rng);
    CHECK(PdlResidual(mdp, p1, p2) <= kIdentityTolerance);
  }
}

}  // namespace
}  // namespace mmil
