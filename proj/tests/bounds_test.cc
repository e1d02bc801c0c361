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
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "mmil/bounds.h"
#include "mmil/builders.h"
#include "mmil/mdp.h"
#include "mmil/moments.h"

namespace mmil {
namespace {

constexpr double kTol = 1e-9;

TEST_CASE("lower bound grid values") {
  const std::vector<std::pair<int, double>> grid{{5, 0.2}, {10, 0.1}, {20, 0.05}};
  for (auto [T, eps] : grid) {
    BoundReport reward = RewardLowerBound(T, eps);
    CHECK(reward.satisfied);
    CHECK(std::abs(reward.measured_gap - eps * T) < kTol);
    CHECK(reward.extras.at("u1_sup_times_T") >= eps * T - kTol);

    BoundReport offq = OffqLowerBound(T, eps);
    CHECK(offq.satisfied);
    CHECK(std::abs(offq.measured_gap - eps * T * T) < kTol);
    CHECK(std::abs(offq.extras.at("u2_sup_times_T") - eps * T) < kTol);
    CHECK(std::abs(offq.extras.at("gap_over_u2_times_T") - T) < kTol);

    BoundReport onq = OnqLowerBound(T, eps);
    CHECK(onq.satisfied);
    CHECK(std::abs(onq.measured_gap - eps * T) < kTol);
    CHECK(std::abs(onq.extras.at("u3_sup_times_T") - eps * T) < kTol);
  }
}

TEST_CASE("cliff drop gap agrees with monte carlo") {
  const int T = 10;
  const double eps = 0.1;
  const int n = 1000000;
  BuiltMdp cliff = BuildCliff(T);
  TimedPolicy drop = CliffDropPolicy(T, eps);
  std::vector<Trajectory> paths = Rollout(cliff.mdp, drop, 77, n);
  double sum = 0.0, sum_sq = 0.0;
  for (const Trajectory& tr : paths) {
    double ret = 0.0;
    for (auto [s, a] : tr.steps) ret += cliff.mdp.reward(s, a);
    sum += ret;
    sum_sq += ret * ret;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  const double exact = PolicyValue(cliff.mdp, drop);
  CHECK(std::abs(mean - exact) <= 3.0 * se);
  const double expert = PolicyValue(cliff.mdp, cliff.expert);
  CHECK(std::abs((expert - exact) / cliff.reward_scale - eps * T) < kTol);
}

TEST_CASE("lower bound argument checks") {
  CHECK_THROWS_AS(OffqLowerBound(10, 0.2), std::invalid_argument);
  CHECK_NOTHROW(OffqLowerBound(10, 0.1));
  CHECK_THROWS_AS(RewardLowerBound(5, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(OnqLowerBound(5, 1.5), std::invalid_argument);
  CHECK(RewardLowerBound(5, 0.0).satisfied);
  CHECK(OffqLowerBound(5, 0.0).satisfied);
}

TEST_CASE("unicycle closed form") {
  CHECK(std::abs(UnicycleClosedForm(3, 0.5) - 1.25) < 1e-15);
  CHECK(UnicycleClosedForm(1, 0.3) == 0.0);
  CHECK(UnicycleClosedForm(5, 0.0) == 0.0);
  // Certain flip at the first step leaves T - 1 costly steps.
  CHECK(std::abs(UnicycleClosedForm(7, 1.0) - 6.0) < 1e-15);
  for (int T = 1; T <= 64; T *= 2) {
    for (double kappa : {0.05, 0.1, 0.5, 1.0}) {
      BoundReport r = Lemma6Study(T, kappa);
      CHECK(r.satisfied);
      CHECK(std::abs(r.measured_gap - UnicycleClosedForm(T, kappa / 2.0)) <= kTol);
      CHECK(r.measured_gap <= kappa * T * T + kTol);
    }
  }
  CHECK_THROWS_AS(Lemma6Study(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Lemma6Study(4, 1.5), std::invalid_argument);
}

TEST_CASE("unicycle growth factor per doubling") {
  BoundReport r = Lemma6Growth(8, 0.1);
  CHECK(std::abs(r.measured_gap - r.extras.at("gap_2T") / r.extras.at("gap_T")) <
        1e-12);
  CHECK(r.satisfied == (r.measured_gap >= 3.5 && r.measured_gap <= 4.0));
  // As kappa shrinks the gap tends to eps*T*(T-1)/2, whose doubling factor
  // 2(2T-1)/(T-1) sits above 4 at every finite T.
  BoundReport tiny = Lemma6Growth(8, 1e-6);
  CHECK(std::abs(tiny.measured_gap - 2.0 * 15.0 / 7.0) < 1e-5);
  CHECK_FALSE(tiny.satisfied);
  CHECK(Lemma6Growth(64, 1e-6).measured_gap > 4.0);
}

TEST_CASE("injected expert certifies with zero gap") {
  for (PayoffKind kind : {PayoffKind::kU1Reward, PayoffKind::kU2OffQ,
                          PayoffKind::kU3OnQ, PayoffKind::kU4Mixed}) {
    for (MdpFamily family : {MdpFamily::kLoop, MdpFamily::kCliff}) {
      BoundReport r = InjectedExpertCertification(kind, family, 6);
      CHECK(r.satisfied);
      CHECK(r.measured_gap == 0.0);
      CHECK(r.extras.at("certified_sup") <= kTol);
    }
  }
}

TEST_CASE("recoverability of a single-action mdp is zero") {
  TabularMdp mdp(2, 1, 4);
  mdp.P(0, 0, 1) = 1.0;
  mdp.P(1, 0, 1) = 1.0;
  mdp.reward(0, 0) = 1.0;
  mdp.initial_dist = {1.0, 0.0};
  mdp.Validate();
  TimedPolicy expert = TimedPolicy::Uniform(4, 2, 1);
  CHECK(RecoverabilityH(expert, InduceExpertQClass(mdp, expert,
                                                   DefaultRewardClass(mdp))) ==
        0.0);
}

TEST_CASE("sparse tree recoverability matches the dense computation") {
  for (int b : {2, 3}) {
    for (int T = 1; T <= 5; ++T) {
      for (bool on_path : {true, false}) {
        BuiltMdp tree = BuildTree(b, T, kDefaultStateCap, on_path);
        FunctionClass qe = InduceExpertQClass(tree.mdp, tree.expert,
                                              DefaultRewardClass(tree.mdp));
        CHECK(std::abs(TreeRecoverability(b, T, on_path) -
                       RecoverabilityH(tree.expert, qe)) < 1e-12);
      }
    }
  }
  CHECK(TreeRecoverability(2, 6, false) == 0.0);
  CHECK_NOTHROW(TreeRecoverability(2, 18));
  CHECK_THROWS_AS(TreeRecoverability(2, 30), ResourceLimitError);
  CHECK_THROWS_AS(TreeRecoverability(1, 3), std::invalid_argument);
}

TEST_CASE("recoverability sweep") {
  std::vector<BoundReport> reports = RecoverabilitySweep({4, 8});
  CHECK(reports.size() == 8);
  for (const BoundReport& r : reports) {
    CHECK(r.satisfied);
    const int T = static_cast<int>(r.parameters.at("T"));
    if (r.instance.rfind("loop", 0) == 0) CHECK(std::abs(r.measured_gap - 1.0) < kTol);
    if (r.instance.rfind("cliff", 0) == 0) CHECK(r.measured_gap >= T - 1 - kTol);
  }
  CHECK(FamilyRecoverability(MdpFamily::kLoop, 16) == doctest::Approx(1.0));
}

TEST_CASE("upper bound constants") {
  CHECK(UpperBoundConstant(PayoffKind::kU1Reward, 6, 0.0) == 12.0);
  CHECK(UpperBoundConstant(PayoffKind::kU2OffQ, 6, 0.0) == 72.0);
  CHECK(UpperBoundConstant(PayoffKind::kU3OnQ, 6, 2.5) == 15.0);
  CHECK(UpperBoundConstant(PayoffKind::kU4Mixed, 6, 0.0) == 144.0);
}

TEST_CASE("upper bound certification on the loop") {
  std::vector<BoundReport> reports =
      UpperBoundCertification(PayoffKind::kU1Reward, MdpFamily::kLoop, 6, 0.05, {0});
  REQUIRE(reports.size() == 2);
  for (const BoundReport& r : reports) {
    CHECK(r.extras.at("certified") == 1.0);
    CHECK(r.extras.at("certified_sup") <= r.extras.at("threshold"));
    CHECK(r.measured_gap <= r.bound_value + kTol);
    CHECK(std::abs(r.bound_value - 12.0 * 0.05) < 1e-12);
    CHECK(r.satisfied);
  }
  std::vector<BoundReport> mixed =
      UpperBoundCertification(PayoffKind::kU4Mixed, MdpFamily::kLoop, 6, 0.05, {0});
  CHECK(mixed.size() == 1);
}

TEST_CASE("experiment and family names round trip") {
  for (Experiment e :
       {Experiment::kRewardLB, Experiment::kOffQLB, Experiment::kOnQLB,
        Experiment::kRewardUB, Experiment::kOffQUB, Experiment::kOnQUB,
        Experiment::kMixedUB, Experiment::kLemma6, Experiment::kRecoverability}) {
    CHECK(ParseExperiment(ToString(e)) == e);
  }
  CHECK_THROWS_AS(ParseExperiment("Lemma7"), std::invalid_argument);
  for (MdpFamily f : {MdpFamily::kLoop, MdpFamily::kCliff, MdpFamily::kUnicycle,
                      MdpFamily::kTree}) {
    CHECK(ParseMdpFamily(ToString(f)) == f);
  }
  CHECK_THROWS_AS(ParseMdpFamily("forest"), std::invalid_argument);
  CHECK_THROWS_AS(RunSuite("everything"), std::invalid_argument);
}

TEST_CASE("markdown summary layout") {
  std::vector<BoundReport> reports = RunSuite("lb");
  CHECK(reports.size() == 9);
  reports.push_back(Lemma6Study(4, 0.1));
  std::string md = MarkdownSummary(reports);
  CHECK(md.rfind("| moments | experiment | instance | measured | bound | satisfied |\n"
                 "|---|---|---|---|---|---|\n",
                 0) == 0);
  CHECK(md.find("| Reward moments | RewardLB | cliff(T=5) | 1 | 1 | yes |") !=
        std::string::npos);
  CHECK(md.find("| Off-policy Q moments | OffQLB | cliff(T=10) | 10 | 10 | yes |") !=
        std::string::npos);
  CHECK(md.find("Compounding error (unicycle)") != std::string::npos);
  CHECK(md.find("\n10 of 10 reports satisfied.\n") != std::string::npos);
  // Groups come out in a fixed order regardless of input order.
  CHECK(md.find("Reward moments") < md.find("Off-policy Q moments"));
  CHECK(md.find("Off-policy Q moments") < md.find("On-policy Q moments"));
}

}  // namespace
}  // namespace mmil
