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
#include <random>
#include <vector>

#include "doctest.h"
#include "mmil/algorithms.h"
#include "mmil/builders.h"
#include "mmil/equilibrium.h"
#include "mmil/mdp.h"
#include "mmil/moments.h"

namespace mmil {
namespace {

constexpr double kTol = 1e-10;

Trajectory Path(std::vector<std::pair<int, int>> steps) {
  Trajectory tr;
  tr.steps = std::move(steps);
  return tr;
}

BcConfig SquaredError(const ForestGrid& grid) {
  BcConfig cfg;
  cfg.loss = BcLoss::kSquaredError;
  cfg.action_embedding = grid.lateral;
  return cfg;
}

TEST_CASE("behavioral cloning recovers a deterministic expert") {
  BuiltMdp cliff = BuildCliff(6);
  ExpertDataset data = ExpertDataset::FromRollouts(cliff.mdp, cliff.expert, 1, 25);
  TimedPolicy pi = BehavioralCloning(data);
  TimedTable counts = VisitCounts(cliff.mdp, data.trajectories);
  for (int t = 0; t < 6; ++t) {
    for (int s = 0; s < 7; ++s) {
      double n = counts(t, s, 0) + counts(t, s, 1);
      for (int a = 0; a < 2; ++a) {
        CHECK(pi(t, s, a) == (n > 0 ? cliff.expert(t, s, a) : 0.5));
      }
    }
  }
  CHECK(counts(0, 0, 0) == 25.0);
  CHECK(std::abs(PolicyValue(cliff.mdp, pi) -
                 PolicyValue(cliff.mdp, cliff.expert)) < kTol);
}

TEST_CASE("behavioral cloning on the bimodal forest expert") {
  ForestGrid grid = BuildForestGrid(DefaultForestSpec());
  const TabularMdp& mdp = grid.built.mdp;
  const int n = 4000;
  ExpertDataset data = ExpertDataset::FromRollouts(mdp, grid.built.expert, 3, n);
  TimedPolicy pi = BehavioralCloning(data);
  // Two rows before the cluster the expert swerves either way.
  const int s = grid.StateIndex(2, 3);
  CHECK(pi(2, s, 1) == 0.0);
  const double se = 0.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(pi(2, s, 0) - 0.5) < 4.0 * se);
  CHECK(std::abs(pi(2, s, 2) - 0.5) < 4.0 * se);

  // The squared-error learner averages the two swerves into going straight,
  // lands on a cell the expert never shows, and hits the cluster.
  TimedPolicy mean = BehavioralCloning(data, SquaredError(grid));
  CHECK(mean(2, s, 1) == 1.0);
  CHECK(std::abs(PolicyValue(mdp, mean) - 4.0) < kTol);
  // Likelihood cloning keeps both modes and never leaves the expert's support.
  CHECK(std::abs(PolicyValue(mdp, pi) - 12.0) < kTol);
  // Averaging the expert's own labels everywhere clears the cluster but not
  // the lone tree.
  CHECK(std::abs(PolicyValue(mdp, MeanActionPolicy(grid)) - 8.0) < kTol);
}

TEST_CASE("bc edge cases") {
  TimedTable counts(2, 2, 3, 0.0);
  TimedPolicy uniform = FitFromCounts(counts, BcConfig());
  for (double p : uniform.probs.data) CHECK(std::abs(p - 1.0 / 3.0) < 1e-15);
  BcConfig bad;
  bad.action_embedding = {0.0, 1.0};
  CHECK_THROWS_AS(FitFromCounts(counts, bad), std::invalid_argument);
  CHECK(ParseBcLoss(ToString(BcLoss::kSquaredError)) == BcLoss::kSquaredError);
  CHECK_THROWS_AS(ParseBcLoss("hinge"), std::invalid_argument);

  BuiltMdp loop = BuildLoop(3);
  ExpertDataset empty{loop.mdp, {}, std::nullopt};
  CHECK_THROWS_AS(empty.Validate(), std::invalid_argument);
  ExpertDataset short_traj{loop.mdp, {Path({{0, 0}})}, std::nullopt};
  CHECK_THROWS_AS(short_traj.Validate(), std::invalid_argument);
  ExpertDataset out_of_range{loop.mdp, {Path({{0, 0}, {5, 0}, {1, 1}})},
                             std::nullopt};
  CHECK_THROWS_AS(out_of_range.Validate(), std::invalid_argument);
}

TEST_CASE("value-form objective telescopes into the occupancy form") {
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(500 + seed);
    const int S = 2 + seed % 5, A = 2 + seed % 2, T = 2 + seed % 7;
    TabularMdp mdp = RandomMdp(S, A, T, rng);
    TimedPolicy expert = RandomPolicy(T, S, A, rng);
    TimedPolicy pi = RandomPolicy(T, S, A, rng);
    TimedTable v(T, S, A);
    std::uniform_real_distribution<double> u(-T, T);
    for (double& x : v.data) x = u(rng);
    const double lhs = AdvilObjective(mdp, expert, pi, v);
    const double rhs = IpmObjective(mdp, expert, pi, BellmanResidual(mdp, pi, v));
    CHECK(std::abs(lhs - rhs) <= 1e-8);
  }
}

TEST_CASE("advil started from the data has zero loss") {
  BuiltMdp loop = BuildLoop(5);
  ExpertDataset data = ExpertDataset::FromRollouts(loop.mdp, loop.expert, 2, 20);
  AdvilConfig cfg;
  cfg.init_from_data = true;
  TrainResult res = AdvilTrain(data, cfg);
  CHECK(res.rounds == 1);
  CHECK(res.converged);
  CHECK(std::abs(res.trace[0].objective) < kTol);
  CHECK(res.trace[0].sup_payoff < kTol);
  // Every v gives L = 0 at this iterate.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    TimedTable v(5, 3, 2);
    for (double& x : v.data) x = u(rng);
    CHECK(std::abs(AdvilObjective(loop.mdp, loop.expert, res.policy, v)) < kTol);
  }
}

TEST_CASE("advil on the loop closes the gap from uniform") {
  BuiltMdp loop = BuildLoop(5);
  const double expert_value = PolicyValue(loop.mdp, loop.expert);
  ExpertDataset data = ExpertDataset::FromRollouts(loop.mdp, loop.expert, 0, 20);
  TrainResult res = AdvilTrain(data, AdvilConfig());
  CHECK(res.converged);
  CHECK(expert_value - PolicyValue(loop.mdp, res.policy) <= 0.1 * expert_value);
  CHECK_NOTHROW(res.policy.Validate());
  CHECK(res.trace.back().sup_payoff <= 0.05);

  AdvilConfig exact;
  exact.exact_inner = true;
  TrainResult ex = AdvilTrain(data, exact);
  CHECK(ex.converged);
  ExpertDataset no_gen{loop.mdp, data.trajectories, std::nullopt};
  CHECK_THROWS_AS(AdvilTrain(no_gen, exact), std::invalid_argument);
}

TEST_CASE("advil learning rates must satisfy eta_f > eta_pi") {
  AdvilConfig cfg;
  cfg.eta_f = 1.0;
  cfg.eta_pi = 1.0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg.eta_f = 0.5;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = AdvilConfig();
  cfg.eta_pi = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
}

TEST_CASE("advil collapse detector matches a replay of the loss trace") {
  // Nearly equal step sizes make the loss oscillate on the loop.
  BuiltMdp loop = BuildLoop(4);
  ExpertDataset data = ExpertDataset::FromRollouts(loop.mdp, loop.expert, 0, 5);
  AdvilConfig cfg;
  cfg.eta_f = 2.1;
  cfg.eta_pi = 2.0;
  cfg.delta = 0.0;
  cfg.max_steps = 200;
  TrainResult plain = AdvilTrain(data, cfg);
  std::vector<double> losses;
  for (const AlgoTraceRecord& r : plain.trace) losses.push_back(r.objective);
  const int w = 3;
  auto variance = [&](int begin) {
    double m = 0.0, q = 0.0;
    for (int i = begin; i < begin + w; ++i) m += losses[i];
    m /= w;
    for (int i = begin; i < begin + w; ++i) q += (losses[i] - m) * (losses[i] - m);
    return q / w;
  };
  for (double factor : {1.0 + 1e-9, 1.5, 10.0, 1e6}) {
    int expected = 0;
    for (int n = 2 * w; n <= static_cast<int>(losses.size()); ++n) {
      double before = variance(n - 2 * w), recent = variance(n - w);
      if (before > 0.0 && recent > factor * before) {
        expected = n;
        break;
      }
    }
    if (factor == 1.5) CHECK(expected > 0);
    cfg.collapse_window = w;
    cfg.collapse_factor = factor;
    TrainResult res = AdvilTrain(data, cfg);
    CHECK(res.collapse_detected == (expected > 0));
    CHECK(res.rounds == (expected > 0 ? expected : plain.rounds));
  }
}

TEST_CASE("adril cost on disjoint supports") {
  BuiltMdp loop = BuildLoop(3);
  std::vector<Trajectory> expert = {Path({{0, 0}, {1, 1}, {1, 1}}),
                                    Path({{0, 0}, {1, 1}, {1, 1}})};
  std::vector<Trajectory> learner = {Path({{0, 1}, {2, 1}, {2, 1}}),
                                     Path({{0, 1}, {2, 1}, {2, 0}}),
                                     Path({{0, 1}, {2, 0}, {1, 0}})};
  TimedTable cost = AdrilCost(loop.mdp, learner, expert, false);
  TimedTable lc = VisitCounts(loop.mdp, learner);
  TimedTable ec = VisitCounts(loop.mdp, expert);
  for (std::size_t i = 0; i < cost.data.size(); ++i) {
    CHECK(!(lc.data[i] > 0 && ec.data[i] > 0));
    double expected = lc.data[i] / 3.0 - ec.data[i] / 2.0;
    CHECK(std::abs(cost.data[i] - expected) < 1e-15);
    if (ec.data[i] > 0) CHECK(cost.data[i] < 0.0);
    if (lc.data[i] > 0) CHECK(cost.data[i] > 0.0);
  }
  CHECK(std::abs(cost(0, 0, 0) + 1.0) < 1e-15);
  CHECK(std::abs(cost(0, 0, 1) - 1.0) < 1e-15);

  TimedTable same = AdrilCost(loop.mdp, expert, expert, false);
  for (double c : same.data) CHECK(c == 0.0);

  // The stationary kernel sums hits over time and repeats the sum.
  TimedTable st = AdrilCost(loop.mdp, learner, expert, true);
  for (int t = 0; t < 3; ++t) {
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        double expected = 0.0;
        for (int u = 0; u < 3; ++u) expected += cost(u, s, a);
        CHECK(std::abs(st(t, s, a) - expected) < 1e-15);
      }
    }
  }
}

TEST_CASE("adril imitates the cliff expert") {
  BuiltMdp cliff = BuildCliff(8);
  ExpertDataset data = ExpertDataset::FromRollouts(cliff.mdp, cliff.expert, 11, 10);
  AdrilResult res = AdrilTrain(data, AdrilConfig());
  CHECK(res.train.converged);
  CHECK(res.train.rounds <= 50);
  const double gap = (PolicyValue(cliff.mdp, cliff.expert) -
                      PolicyValue(cliff.mdp, res.train.policy)) /
                     cliff.reward_scale;
  CHECK(gap <= 0.05 * 8);
  CHECK(res.max_invariant_residual <= 1e-10);
  CHECK_NOTHROW(res.train.policy.Validate());
}

TEST_CASE("adril cost table matches a recomputation every round") {
  BuiltMdp cliff = BuildCliff(5);
  ExpertDataset data = ExpertDataset::FromRollouts(cliff.mdp, cliff.expert, 2, 6);
  for (int freq : {0, 1, 3}) {
    for (bool stationary : {false, true}) {
      for (bool balanced : {false, true}) {
        AdrilConfig cfg;
        cfg.f_update_freq = freq;
        cfg.stationary_kernel = stationary;
        cfg.balanced_sampling = balanced;
        cfg.alpha = 0.5;
        cfg.delta = 0.0;
        cfg.max_rounds = 7;
        cfg.rollouts_per_round = 4;
        cfg.seed = 9;
        AdrilResult res = AdrilTrain(data, cfg);
        const int k = res.train.rounds;
        CHECK(res.max_invariant_residual <= 1e-10);
        CHECK(AdrilInvariantResidual(res.state) <= 1e-10);
        CHECK(res.state.aggregated_learner_data.size() == 4u * k);
        // Frozen runs never fold learner data into the cost.
        int last_refresh = 1;
        if (freq > 0) last_refresh = k - (k - 1) % freq;
        CHECK(res.state.cost_snapshot == 4 * (last_refresh - 1));
        AdrilResult again = AdrilTrain(data, cfg);
        CHECK(again.train.policy.probs.data == res.train.policy.probs.data);
      }
    }
  }
  AdrilConfig bad;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(AdrilTrain(data, bad), std::invalid_argument);
}

TEST_CASE("indicator ipm is zero at the expert occupancy") {
  BuiltMdp cliff = BuildCliff(4);
  OccupancyMeasure occ = Occupancy(cliff.mdp, cliff.expert);
  CHECK(IndicatorIpm(cliff.mdp, cliff.expert, occ.d) == 0.0);
  // Dropping with probability p moves mass 2p at every step.
  TimedPolicy drop = CliffDropPolicy(4, 0.25);
  CHECK(std::abs(IndicatorIpm(cliff.mdp, drop, occ.d) - 4 * 2 * 0.25) < kTol);
}

TEST_CASE("daequil exits at once when the warm start is the expert") {
  BuiltMdp cliff = BuildCliff(6);
  DaequilResult res = DaequilTrain(cliff.mdp, QueryableExpert{cliff.expert},
                                   DefaultRewardClass(cliff.mdp), DaequilConfig());
  CHECK(res.train.rounds == 1);
  CHECK(res.train.converged);
  CHECK(res.round_losses[0] <= 0.05);
  CHECK(res.max_identity_residual <= 1e-8);
}

TEST_CASE("daequil round loss equals the round's best vertex payoff") {
  ForestGrid grid = BuildForestGrid(DefaultForestSpec());
  FunctionClass swerve = ForestSwerveClass(grid);
  for (std::uint64_t seed : {0u, 5u}) {
    DaequilConfig cfg;
    cfg.delta = 0.0;
    cfg.max_rounds = 4;
    cfg.seed = seed;
    DaequilResult res =
        DaequilTrain(grid.built.mdp, QueryableExpert{grid.built.expert}, swerve, cfg);
    REQUIRE(res.round_losses.size() == 4);
    CHECK(res.max_identity_residual <= 1e-8);
    for (std::size_t r = 0; r < res.round_losses.size(); ++r) {
      CHECK(std::abs(res.round_losses[r] - res.round_max_payoffs[r]) <= 1e-8);
      CHECK(res.round_max_payoffs[r] >= -1e-12);
    }
  }
}

TEST_CASE("daequil outperforms dagger on the forest") {
  ForestGrid grid = BuildForestGrid(DefaultForestSpec());
  const TabularMdp& mdp = grid.built.mdp;
  QueryableExpert expert{grid.built.expert};
  DaequilConfig dq;
  dq.delta = 0.0;
  dq.seed = 1;
  DaggerConfig dg;
  dg.bc = SquaredError(grid);
  dg.seed = 1;
  const double daequil =
      PolicyValue(mdp, DaequilTrain(mdp, expert, ForestSwerveClass(grid), dq)
                           .train.policy);
  const double dagger = PolicyValue(mdp, DaggerTrain(mdp, expert, dg).train.policy);
  CHECK(daequil > dagger);
  CHECK(daequil >= 12.0 - 0.1);
}

TEST_CASE("dagger aggregates linearly and plateaus at the bimodal tree") {
  ForestGrid grid = BuildForestGrid(DefaultForestSpec());
  const TabularMdp& mdp = grid.built.mdp;
  DaggerConfig cfg;
  cfg.bc = SquaredError(grid);
  cfg.rounds = 6;
  cfg.rollouts_per_round = 5;
  cfg.seed = 2;
  DaggerResult res = DaggerTrain(mdp, QueryableExpert{grid.built.expert}, cfg);
  REQUIRE(res.aggregate_sizes.size() == 7);
  for (int r = 0; r <= 6; ++r) CHECK(res.aggregate_sizes[r] == (r + 1) * 5 * 12);
  // Labels fix the cluster, but the lone tree in row 8 is passed either
  // way, and the averaged label drives straight into it.
  CHECK(std::abs(PolicyValue(mdp, res.train.policy) - 8.0) < kTol);
}

TEST_CASE("dagger recovers a deterministic expert") {
  BuiltMdp cliff = BuildCliff(6);
  DaggerResult res = DaggerTrain(cliff.mdp, QueryableExpert{cliff.expert},
                                 DaggerConfig());
  CHECK(std::abs(res.train.trace.back().exact_gap) < kTol);
  CHECK(res.train.trace.back().sup_payoff < kTol);
  CHECK(res.train.trace.back().objective == 0.0);
}

TEST_CASE("swerve class marks threatened cells") {
  ForestGrid grid = BuildForestGrid(DefaultForestSpec());
  FunctionClass cls = ForestSwerveClass(grid);
  const int s = grid.StateIndex(3, 3);
  CHECK(grid.threat[s] == 1);
  CHECK(cls.basis[0](0, s, 0) == 1.0);
  CHECK(cls.basis[0](0, s, 1) == 0.0);
  CHECK(cls.basis[0](0, grid.StateIndex(0, 3), 2) == 0.0);
}

TEST_CASE("algorithm config validation") {
  DaequilConfig dq;
  dq.reg_weight = 0.0;
  CHECK_THROWS_AS(dq.Validate(), std::invalid_argument);
  dq = DaequilConfig();
  dq.max_rounds = 0;
  CHECK_THROWS_AS(dq.Validate(), std::invalid_argument);
  DaggerConfig dg;
  dg.rollouts_per_round = 0;
  CHECK_THROWS_AS(dg.Validate(), std::invalid_argument);
  AdrilConfig ad;
  ad.f_update_freq = -1;
  CHECK_THROWS_AS(ad.Validate(), std::invalid_argument);
  BuiltMdp cliff = BuildCliff(4);
  BuiltMdp loop = BuildLoop(4);
  CHECK_THROWS_AS(DaequilTrain(cliff.mdp, QueryableExpert{cliff.expert},
                               DefaultRewardClass(loop.mdp), DaequilConfig()),
                  std::invalid_argument);
}

}  // namespace
}  // namespace mmil
