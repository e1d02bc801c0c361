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

#ifndef MMIL_BOUNDS_H_
#define MMIL_BOUNDS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmil/builders.h"
#include "mmil/equilibrium.h"
#include "mmil/moments.h"

namespace mmil {

enum class Experiment {
  kRewardLB,
  kOffQLB,
  kOnQLB,
  kRewardUB,
  kOffQUB,
  kOnQUB,
  kMixedUB,
  kLemma6,
  kRecoverability,
};

std::string ToString(Experiment experiment);
Experiment ParseExperiment(const std::string& name);

inline constexpr double kBoundTolerance = 1e-9;

struct BoundReport {
  Experiment experiment = Experiment::kRewardLB;
  std::string instance;
  std::map<std::string, double> parameters;
  double measured_gap = 0.0;
  double bound_value = 0.0;
  bool satisfied = false;
  // Secondary measurements, e.g. sup payoffs, ratios, scaled gaps.
  std::map<std::string, double> extras;
  std::string note;
};

// Unscaled two-indicator Cliff cost as a raw (t, s, a) table.
TimedTable CliffCostTable(int horizon);

BoundReport RewardLowerBound(int horizon, double epsilon);
BoundReport OffqLowerBound(int horizon, double epsilon);
BoundReport OnqLowerBound(int horizon, double epsilon);

// sum_{t=1}^T eps (1 - eps)^(t-1) (T - t).
double UnicycleClosedForm(int horizon, double epsilon);
BoundReport Lemma6Study(int horizon, double kappa);
// Growth factor gap(2T) / gap(T) at fixed kappa; satisfied when the factor
// lies in [3.5, 4.0].
BoundReport Lemma6Growth(int horizon, double kappa);

enum class MdpFamily { kLoop, kCliff, kUnicycle, kTree };
std::string ToString(MdpFamily family);
MdpFamily ParseMdpFamily(const std::string& name);

// The game each upper-bound row is certified on, for a built instance.
GameSpec UpperBoundGame(PayoffKind kind, const BuiltMdp& built,
                        std::uint64_t seed);
// Proof constant times delta: 2T, 2T^2, HT and 4T^2 respectively.
double UpperBoundConstant(PayoffKind kind, int horizon, double recoverability);

// Solves the game in every mode supported for the payoff, once per seed,
// and checks exact gap <= constant * delta for each certified result.
std::vector<BoundReport> UpperBoundCertification(
    PayoffKind kind, MdpFamily family, int horizon, double delta,
    const std::vector<std::uint64_t>& seeds, int max_outer_iters = 2000);
// The degenerate certification with the expert injected as the answer.
BoundReport InjectedExpertCertification(PayoffKind kind, MdpFamily family,
                                        int horizon);

// Recoverability of the tree's expert-Q class for the {r, -r} basis by a
// sparse backward pass, usable where the dense mdp would not fit.
double TreeRecoverability(int branching, int horizon,
                          bool reward_on_expert_path = true);
// Recoverability of the expert-Q class generated by the family's basis.
double FamilyRecoverability(MdpFamily family, int horizon);
std::vector<BoundReport> RecoverabilitySweep(
    const std::vector<int>& horizons = {4, 8, 16});

BuiltMdp BuildFamily(MdpFamily family, int horizon);

// Suites: "lb", "ub", "lemma6", "recover" or "all".
std::vector<BoundReport> RunSuite(const std::string& suite);
// One row per report in a table grouped by moment type.
std::string MarkdownSummary(const std::vector<BoundReport>& reports);

}  // namespace mmil

#endif  // MMIL_BOUNDS_H_
