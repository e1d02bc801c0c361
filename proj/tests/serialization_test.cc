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
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "mmil/algorithms.h"
#include "mmil/bounds.h"
#include "mmil/builders.h"
#include "mmil/equilibrium.h"
#include "mmil/serialization.h"

namespace mmil {
namespace {

// Serializing, parsing the text back and serializing again must reproduce
// the exact bytes.
template <typename T, typename Parse>
std::string CheckStable(const T& value, Parse parse) {
  std::string first = DumpJson(ToJson(value));
  std::string second = DumpJson(ToJson(parse(ParseJsonText(first))));
  CHECK(first == second);
  return first;
}

TEST_CASE("random mdp round trips bit for bit") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    TabularMdp mdp = RandomMdp(3 + trial, 2, 4, rng);
    CheckStable(mdp, MdpFromJson);
    TabularMdp back = MdpFromJson(ParseJsonText(DumpJson(ToJson(mdp))));
    CHECK(back.transition == mdp.transition);
    CHECK(back.reward.data == mdp.reward.data);
    CHECK(back.initial_dist == mdp.initial_dist);
    CHECK(back.horizon == mdp.horizon);
  }
  BuiltMdp cliff = BuildCliff(5);
  TabularMdp labelled = MdpFromJson(ToJson(cliff.mdp));
  CHECK(labelled.state_labels == cliff.mdp.state_labels);
  CHECK(labelled.action_labels == cliff.mdp.action_labels);
}

TEST_CASE("policy, bundle, class, game and dataset round trips") {
  std::mt19937_64 rng(8);
  TimedPolicy pi = RandomPolicy(4, 3, 2, rng);
  CheckStable(pi, PolicyFromJson);
  CHECK(PolicyFromJson(ToJson(pi)).probs.data == pi.probs.data);

  BuiltMdp loop = BuildLoop(4);
  CheckStable(loop, BuiltMdpFromJson);
  CHECK(BuiltMdpFromJson(ToJson(loop)).reward_scale == loop.reward_scale);

  FunctionClass cls = InduceExpertQClass(loop.mdp, loop.expert,
                                         DefaultRewardClass(loop.mdp));
  CheckStable(cls, FunctionClassFromJson);
  Discriminator disc = Discriminator::UniformOver(cls);
  CheckStable(disc, DiscriminatorFromJson);

  for (PayoffKind kind : {PayoffKind::kU1Reward, PayoffKind::kU3OnQ,
                          PayoffKind::kU4Mixed}) {
    GameSpec game = UpperBoundGame(kind, loop, 3);
    CheckStable(game, GameFromJson);
    GameSpec back = GameFromJson(ToJson(game));
    CHECK(back.payoff_scale_k == game.payoff_scale_k);
    CHECK(back.recoverability == game.recoverability);
  }

  ExpertDataset data = ExpertDataset::FromRollouts(loop.mdp, loop.expert, 4, 6);
  CheckStable(data, DatasetFromJson);
  ExpertDataset no_gen{loop.mdp, data.trajectories, std::nullopt};
  CHECK_FALSE(DatasetFromJson(ToJson(no_gen)).generator.has_value());
  CHECK(DatasetFromJson(ToJson(data)).generator.has_value());
}

TEST_CASE("solver and training results round trip") {
  BuiltMdp loop = BuildLoop(4);
  GameSpec game = UpperBoundGame(PayoffKind::kU1Reward, loop, 0);
  SolverConfig cfg;
  cfg.seed = 5;
  EquilibriumResult res = Solve(game, cfg);
  std::string text = CheckStable(res, EquilibriumResultFromJson);
  EquilibriumResult back = EquilibriumResultFromJson(ParseJsonText(text));
  CHECK(back.trace.size() == res.trace.size());
  CHECK(back.alpha == res.alpha);
  CHECK(back.certified == res.certified);
  CHECK(ToJson(CheckEquilibrium(game, res.policy, res.discriminator, 0.1))
            .contains("holds"));

  ExpertDataset data = ExpertDataset::FromRollouts(loop.mdp, loop.expert, 0, 10);
  TrainResult train = AdvilTrain(data, AdvilConfig());
  CheckStable(train, TrainResultFromJson);

  std::vector<BoundReport> reports = RunSuite("lb");
  CheckStable(reports, BoundReportsFromJson);
  CheckStable(reports.front(), BoundReportFromJson);
}

TEST_CASE("non-finite doubles survive as strings") {
  EquilibriumResult res;
  res.policy = TimedPolicy::Uniform(1, 1, 1);
  res.discriminator.class_id = "c";
  res.discriminator.weights = {1.0, 0.0};
  res.certified_sup = std::numeric_limits<double>::infinity();
  res.threshold = -std::numeric_limits<double>::infinity();
  res.q_m = std::numeric_limits<double>::quiet_NaN();
  Json j = ToJson(res);
  CHECK(j.at("certified_sup") == "inf");
  CHECK(j.at("threshold") == "-inf");
  CHECK(j.at("q_m") == "nan");
  EquilibriumResult back = EquilibriumResultFromJson(ParseJsonText(DumpJson(j)));
  CHECK(std::isinf(back.certified_sup));
  CHECK(back.certified_sup > 0);
  CHECK(back.threshold < 0);
  CHECK(std::isnan(back.q_m));
}

TEST_CASE("doubles use the shortest round-trip form") {
  CHECK(FormatDouble(0.1) == "0.1");
  CHECK(FormatDouble(1.0) == "1");
  CHECK(FormatDouble(1.0 / 3.0) == "0.3333333333333333");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    double x = u(rng);
    CHECK(std::stod(FormatDouble(x)) == x);
  }
}

TEST_CASE("configs round trip and reject unknown keys") {
  SolverConfig sc;
  sc.mode = SolverMode::kDual;
  sc.alpha = 0.25;
  sc.seed = 0xffffffffffffull;
  CheckStable(sc, SolverConfigFromJson);
  CHECK(SolverConfigFromJson(ToJson(sc)).seed == sc.seed);

  BcConfig bc;
  bc.loss = BcLoss::kSquaredError;
  bc.action_embedding = {-1.0, 0.0, 1.0};
  CheckStable(bc, BcConfigFromJson);
  CheckStable(AdvilConfig(), AdvilConfigFromJson);
  CheckStable(AdrilConfig(), AdrilConfigFromJson);
  CheckStable(DaequilConfig(), DaequilConfigFromJson);
  DaggerConfig dg;
  dg.bc = bc;
  CheckStable(dg, DaggerConfigFromJson);
  CHECK(DaggerConfigFromJson(ToJson(dg)).bc.loss == BcLoss::kSquaredError);

  CHECK_THROWS_AS(SolverConfigFromJson(Json::parse(R"({"target_delta": 0.1, "tpyo": 1})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(DaggerConfigFromJson(Json::parse(R"({"bc": {"los": "log_loss"}})")),
                  std::invalid_argument);
  // Absent keys keep their defaults.
  AdvilConfig partial = AdvilConfigFromJson(Json::parse(R"({"eta_pi": 3})"));
  CHECK(partial.eta_pi == 3.0);
  CHECK(partial.eta_f == AdvilConfig().eta_f);
  CHECK_THROWS_AS(AdvilConfigFromJson(Json::parse(R"({"eta_pi": "fast"})")),
                  std::invalid_argument);
}

TEST_CASE("malformed documents are rejected") {
  BuiltMdp loop = BuildLoop(3);
  Json mdp = ToJson(loop.mdp);
  Json wrong_schema = mdp;
  wrong_schema["schema"] = "mmil/policy/v1";
  CHECK_THROWS_AS(MdpFromJson(wrong_schema), std::invalid_argument);
  Json ragged = mdp;
  ragged["transition"][0][0].erase(ragged["transition"][0][0].begin());
  CHECK_THROWS_AS(MdpFromJson(ragged), std::invalid_argument);
  Json unnormalised = mdp;
  unnormalised["initial_dist"] = {0.5, 0.0, 0.0};
  CHECK_THROWS_AS(MdpFromJson(unnormalised), std::invalid_argument);

  Json pi = ToJson(loop.expert);
  pi["probs"][0][0] = {0.7, 0.7};
  CHECK_THROWS_AS(PolicyFromJson(pi), std::invalid_argument);
  Json short_pi = ToJson(loop.expert);
  short_pi["horizon"] = 5;
  CHECK_THROWS_AS(PolicyFromJson(short_pi), std::invalid_argument);

  Json traj = Json::parse("[[[0, 0], [1]]]");
  CHECK_THROWS_AS(TrajectoriesFromJson(traj), std::invalid_argument);
  CHECK_THROWS_AS(ParseJsonText("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(ReadJsonFile("/nonexistent/mmil.json"), std::invalid_argument);
}

TEST_CASE("trace csv layout") {
  std::vector<TraceRecord> solve{{1, 0.5, 0.25, 1.0, 0.125}, {2, -1, 0, 2, 0}};
  CHECK(SolveTraceCsv(solve) ==
        "iter,payoff,sup_payoff,entropy,regret_avg\n"
        "1,0.5,0.25,1,0.125\n"
        "2,-1,0,2,0\n");
  std::vector<AlgoTraceRecord> algo{{3, 0.1, 0.2, 0.3}};
  CHECK(AlgoTraceCsv(algo) == "round,objective,exact_gap,sup_payoff\n3,0.1,0.2,0.3\n");
  CHECK(AlgoTraceCsv({}) == "round,objective,exact_gap,sup_payoff\n");
}

TEST_CASE("object keys come out sorted") {
  std::string text = DumpJson(ToJson(AdvilConfig()));
  CHECK(text.find("\"collapse_factor\"") < text.find("\"delta\""));
  CHECK(text.find("\"delta\"") < text.find("\"eta_f\""));
  CHECK(text.back() == '\n');
}

}  // namespace
}  // namespace mmil
