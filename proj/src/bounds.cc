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

#include "mmil/bounds.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mmil {
namespace {

std::string Fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string Instance(const std::string& family, int horizon) {
  return family + "(T=" + std::to_string(horizon) + ")";
}

void RequireEpsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
}

// Cost basis {c} as a raw function list for payoff evaluation.
std::vector<TimedTable> CostBasis(int horizon) {
  return {CliffCostTable(horizon)};
}

// Unscaled gap of the Cliff learner that drops with probability p at s0.
double CliffUnscaledGap(int horizon, double p) {
  BuiltMdp cliff = BuildCliff(horizon);
  double gap = PolicyValue(cliff.mdp, cliff.expert) -
               PolicyValue(cliff.mdp, CliffDropPolicy(horizon, p));
  return gap / cliff.reward_scale;
}

// Expert Q class of the unscaled cost. Its entries reach T + 1, past the
// [-T, T] range the induced-class builder enforces, so it is assembled here.
FunctionClass CliffCostExpertQClass(const BuiltMdp& cliff) {
  const int T = cliff.mdp.horizon;
  FunctionClass cls;
  cls.id = "qe_cost";
  cls.kind = ClassKind::kOnPolicyQ;
  cls.basis = {QValues(cliff.mdp, cliff.expert, CliffCostTable(T)).q};
  cls.labels = {"E[pi0,c]"};
  cls.range_bound = cls.basis.front().MaxAbs();
  cls.scale = 2.0 * T;
  cls.Validate();
  return cls;
}

}  // namespace

double TreeRecoverability(int branching, int horizon,
                          bool reward_on_expert_path) {
  if (branching < 2) throw std::invalid_argument("tree: branching must be >= 2");
  if (horizon < 1) throw std::invalid_argument("tree: horizon must be >= 1");
  long long count = 0, level = 1;
  for (int d = 0; d <= horizon; ++d) {
    count += level;
    if (count > kDefaultStateCap) {
      throw ResourceLimitError("tree: state count exceeds cap");
    }
    if (d < horizon) level *= branching;
  }
  const long long first_leaf = count - level;
  std::vector<char> on_path(count, 0);
  if (reward_on_expert_path) {
    for (long long node = 0; node < count; node = node * branching + branching) {
      on_path[node] = 1;
      if (node >= first_leaf) break;
    }
  }
  auto child = [&](long long s, int a) {
    return s >= first_leaf ? s : s * branching + 1 + a;
  };
  // Backward expert values with the expert always taking the last action.
  std::vector<double> next(count, 0.0), cur(count, 0.0);
  double h = 0.0;
  for (int t = horizon - 1; t >= 0; --t) {
    for (long long s = 0; s < count; ++s) {
      double r = on_path[s] ? 1.0 : 0.0;
      double expert_q = r + (t + 1 < horizon ? next[child(s, branching - 1)] : 0.0);
      for (int a = 0; a + 1 < branching; ++a) {
        double q = r + (t + 1 < horizon ? next[child(s, a)] : 0.0);
        h = std::max(h, std::abs(q - expert_q));
      }
      cur[s] = expert_q;
    }
    std::swap(cur, next);
  }
  return h;
}

std::string ToString(Experiment experiment) {
  switch (experiment) {
    case Experiment::kRewardLB: return "RewardLB";
    case Experiment::kOffQLB: return "OffQLB";
    case Experiment::kOnQLB: return "OnQLB";
    case Experiment::kRewardUB: return "RewardUB";
    case Experiment::kOffQUB: return "OffQUB";
    case Experiment::kOnQUB: return "OnQUB";
    case Experiment::kMixedUB: return "MixedUB";
    case Experiment::kLemma6: return "Lemma6";
    case Experiment::kRecoverability: return "Recoverability";
  }
  return "unknown";
}

Experiment ParseExperiment(const std::string& name) {
  for (Experiment e :
       {Experiment::kRewardLB, Experiment::kOffQLB, Experiment::kOnQLB,
        Experiment::kRewardUB, Experiment::kOffQUB, Experiment::kOnQUB,
        Experiment::kMixedUB, Experiment::kLemma6,
        Experiment::kRecoverability}) {
    if (ToString(e) == name) return e;
  }
  throw std::invalid_argument("unknown experiment: " + name);
}

TimedTable CliffCostTable(int horizon) {
  return TimedTable::Broadcast(CliffCost(horizon), horizon);
}

BoundReport RewardLowerBound(int horizon, double epsilon) {
  RequireEpsilon(epsilon);
  BuiltMdp cliff = BuildCliff(horizon);
  TimedPolicy learner = CliffDropPolicy(horizon, epsilon);
  BoundReport r;
  r.experiment = Experiment::kRewardLB;
  r.instance = Instance("cliff", horizon);
  r.parameters = {{"T", horizon}, {"epsilon", epsilon}};
  r.measured_gap = CliffUnscaledGap(horizon, epsilon);
  r.bound_value = epsilon * horizon;
  double sup_times_t = horizon * RawSupPayoff(PayoffKind::kU1Reward, cliff.mdp,
                                              cliff.expert, learner,
                                              CostBasis(horizon));
  r.extras = {{"u1_sup_times_T", sup_times_t},
              {"scaled_gap", r.measured_gap * cliff.reward_scale}};
  r.satisfied = std::abs(r.measured_gap - r.bound_value) <= kBoundTolerance &&
                sup_times_t >= epsilon * horizon - kBoundTolerance;
  r.note = "gap = eps*T; the cost discriminator sees eps per step";
  return r;
}

BoundReport OffqLowerBound(int horizon, double epsilon) {
  RequireEpsilon(epsilon);
  if (epsilon * horizon > 1.0 + 1e-12) {
    throw std::invalid_argument("offq lower bound: requires eps*T <= 1");
  }
  const double p = std::min(1.0, epsilon * horizon);
  BuiltMdp cliff = BuildCliff(horizon);
  TimedPolicy learner = CliffDropPolicy(horizon, p);
  BoundReport r;
  r.experiment = Experiment::kOffQLB;
  r.instance = Instance("cliff", horizon);
  r.parameters = {{"T", horizon}, {"epsilon", epsilon}};
  r.measured_gap = CliffUnscaledGap(horizon, p);
  r.bound_value = epsilon * horizon * horizon;
  double u2_times_t = horizon * RawSupPayoff(PayoffKind::kU2OffQ, cliff.mdp,
                                             cliff.expert, learner,
                                             CostBasis(horizon));
  double ratio = u2_times_t > 0.0 ? r.measured_gap / u2_times_t : 0.0;
  r.extras = {{"u2_sup_times_T", u2_times_t},
              {"gap_over_u2_times_T", ratio},
              {"scaled_gap", r.measured_gap * cliff.reward_scale}};
  bool ratio_ok = epsilon == 0.0 ||
                  std::abs(ratio - horizon) <= kBoundTolerance;
  r.satisfied = std::abs(r.measured_gap - r.bound_value) <= kBoundTolerance &&
                std::abs(u2_times_t - epsilon * horizon) <= kBoundTolerance &&
                ratio_ok;
  r.note = "gap = eps*T*T while the expert-state view sees eps*T";
  return r;
}

BoundReport OnqLowerBound(int horizon, double epsilon) {
  RequireEpsilon(epsilon);
  BuiltMdp cliff = BuildCliff(horizon);
  TimedPolicy learner = CliffDropPolicy(horizon, epsilon);
  FunctionClass qe = CliffCostExpertQClass(cliff);
  BoundReport r;
  r.experiment = Experiment::kOnQLB;
  r.instance = Instance("cliff", horizon);
  r.parameters = {{"T", horizon}, {"epsilon", epsilon}};
  r.measured_gap = CliffUnscaledGap(horizon, epsilon);
  r.bound_value = epsilon * horizon;
  double u3_times_t = horizon * RawSupPayoff(PayoffKind::kU3OnQ, cliff.mdp,
                                             cliff.expert, learner, qe.basis);
  r.extras = {{"u3_sup_times_T", u3_times_t},
              {"scaled_gap", r.measured_gap * cliff.reward_scale}};
  r.satisfied = std::abs(r.measured_gap - r.bound_value) <= kBoundTolerance &&
                std::abs(u3_times_t - epsilon * horizon) <= kBoundTolerance;
  r.note = "the on-policy Q view cannot certify below eps*T here";
  return r;
}

double UnicycleClosedForm(int horizon, double epsilon) {
  double total = 0.0, survive = 1.0;
  for (int t = 1; t <= horizon; ++t) {
    total += epsilon * survive * (horizon - t);
    survive *= 1.0 - epsilon;
  }
  return total;
}

BoundReport Lemma6Study(int horizon, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw std::invalid_argument("lemma6: kappa must lie in (0, 1]");
  }
  // A flip with probability eps gives a per-state error l(s) = 2 eps.
  const double epsilon = kappa / 2.0;
  BuiltMdp uni = BuildUnicycle(horizon);
  BoundReport r;
  r.experiment = Experiment::kLemma6;
  r.instance = Instance("unicycle", horizon);
  r.parameters = {{"T", horizon}, {"kappa", kappa}, {"epsilon", epsilon}};
  r.measured_gap = PolicyValue(uni.mdp, uni.expert) -
                   PolicyValue(uni.mdp, UnicycleFlipPolicy(horizon, epsilon));
  r.bound_value = UnicycleClosedForm(horizon, epsilon);
  r.extras = {{"gap_over_kappa_T2",
               r.measured_gap / (kappa * horizon * horizon)}};
  r.satisfied = std::abs(r.measured_gap - r.bound_value) <= kBoundTolerance;
  r.note = "exact gap against the closed form";
  return r;
}

BoundReport Lemma6Growth(int horizon, double kappa) {
  BoundReport small = Lemma6Study(horizon, kappa);
  BoundReport large = Lemma6Study(2 * horizon, kappa);
  BoundReport r;
  r.experiment = Experiment::kLemma6;
  r.instance = "unicycle(T=" + std::to_string(horizon) + "->" +
               std::to_string(2 * horizon) + ")";
  r.parameters = {{"T", horizon}, {"kappa", kappa}, {"epsilon", kappa / 2.0}};
  r.measured_gap = small.measured_gap > 0.0
                       ? large.measured_gap / small.measured_gap
                       : 0.0;
  r.bound_value = 4.0;
  r.extras = {{"gap_T", small.measured_gap},
              {"gap_2T", large.measured_gap},
              {"ratio_lo", 3.5},
              {"ratio_hi", 4.0}};
  r.satisfied = r.measured_gap >= 3.5 && r.measured_gap <= 4.0;
  r.note = "growth factor per doubling, accepted in [3.5, 4.0]";
  return r;
}

std::string ToString(MdpFamily family) {
  switch (family) {
    case MdpFamily::kLoop: return "loop";
    case MdpFamily::kCliff: return "cliff";
    case MdpFamily::kUnicycle: return "unicycle";
    case MdpFamily::kTree: return "tree";
  }
  return "unknown";
}

MdpFamily ParseMdpFamily(const std::string& name) {
  if (name == "loop") return MdpFamily::kLoop;
  if (name == "cliff") return MdpFamily::kCliff;
  if (name == "unicycle") return MdpFamily::kUnicycle;
  if (name == "tree") return MdpFamily::kTree;
  throw std::invalid_argument("unknown mdp family: " + name);
}

BuiltMdp BuildFamily(MdpFamily family, int horizon) {
  switch (family) {
    case MdpFamily::kLoop: return BuildLoop(horizon);
    case MdpFamily::kCliff: return BuildCliff(horizon);
    case MdpFamily::kUnicycle: return BuildUnicycle(horizon);
    case MdpFamily::kTree: return BuildTree(2, horizon);
  }
  throw std::invalid_argument("unknown mdp family");
}

GameSpec UpperBoundGame(PayoffKind kind, const BuiltMdp& built,
                        std::uint64_t seed) {
  const TabularMdp& mdp = built.mdp;
  FunctionClass reward = DefaultRewardClass(mdp);
  switch (kind) {
    case PayoffKind::kU1Reward:
      return MakeGame(kind, mdp, built.expert, reward);
    case PayoffKind::kU2OffQ:
      return MakeGame(kind, mdp, built.expert,
                      InduceQClass(mdp, reward,
                                   DefaultAnchors(mdp, built.expert,
                                                  kDefaultRandomAnchors, seed)));
    case PayoffKind::kU3OnQ:
      return MakeGame(kind, mdp, built.expert,
                      InduceExpertQClass(mdp, built.expert, reward));
    case PayoffKind::kU4Mixed:
      return MakeGame(kind, mdp, built.expert,
                      MixedClass(mdp, reward,
                                 DefaultAnchors(mdp, built.expert,
                                                kDefaultRandomAnchors, seed)));
  }
  throw std::invalid_argument("unknown payoff kind");
}

double UpperBoundConstant(PayoffKind kind, int horizon, double recoverability) {
  const double T = horizon;
  switch (kind) {
    case PayoffKind::kU1Reward: return 2.0 * T;
    case PayoffKind::kU2OffQ: return 2.0 * T * T;
    case PayoffKind::kU3OnQ: return recoverability * T;
    case PayoffKind::kU4Mixed: return 4.0 * T * T;
  }
  throw std::invalid_argument("unknown payoff kind");
}

namespace {

Experiment UpperExperiment(PayoffKind kind) {
  switch (kind) {
    case PayoffKind::kU1Reward: return Experiment::kRewardUB;
    case PayoffKind::kU2OffQ: return Experiment::kOffQUB;
    case PayoffKind::kU3OnQ: return Experiment::kOnQUB;
    case PayoffKind::kU4Mixed: return Experiment::kMixedUB;
  }
  return Experiment::kRewardUB;
}

}  // namespace

std::vector<BoundReport> UpperBoundCertification(
    PayoffKind kind, MdpFamily family, int horizon, double delta,
    const std::vector<std::uint64_t>& seeds, int max_outer_iters) {
  BuiltMdp built = BuildFamily(family, horizon);
  std::vector<BoundReport> out;
  std::vector<SolverMode> modes{SolverMode::kPrimal};
  if (kind != PayoffKind::kU4Mixed) modes.push_back(SolverMode::kDual);
  for (std::uint64_t seed : seeds) {
    GameSpec game = UpperBoundGame(kind, built, seed);
    const double constant =
        UpperBoundConstant(kind, horizon, game.recoverability);
    for (SolverMode mode : modes) {
      SolverConfig config;
      config.mode = mode;
      config.target_delta = delta;
      config.max_outer_iters = max_outer_iters;
      config.seed = seed;
      EquilibriumResult res = Solve(game, config);
      // Re-check the certificate rather than trusting the solver flag.
      double sup = BestResponseDiscriminator(game, res.policy).sup_payoff;
      bool certified = sup <= res.threshold;
      BoundReport r;
      r.experiment = UpperExperiment(kind);
      r.instance = Instance(ToString(family), horizon) + "/" +
                   ToString(kind) + "/" + ToString(mode) + "/seed=" +
                   std::to_string(seed);
      r.parameters = {{"T", horizon},
                      {"delta", delta},
                      {"H", game.recoverability},
                      {"alpha", res.alpha},
                      {"seed", static_cast<double>(seed)}};
      r.measured_gap = PolicyValue(built.mdp, built.expert) -
                       PolicyValue(built.mdp, res.policy);
      r.bound_value = constant * delta;
      r.extras = {{"certified", certified ? 1.0 : 0.0},
                  {"certified_sup", sup},
                  {"threshold", res.threshold},
                  {"iterations", res.iterations},
                  {"unscaled_gap", r.measured_gap / built.reward_scale},
                  {"slack", r.bound_value - r.measured_gap}};
      r.satisfied = certified && r.measured_gap <= r.bound_value + kBoundTolerance;
      r.note = certified ? "certified" : "uncertified: bound not asserted";
      out.push_back(std::move(r));
    }
  }
  return out;
}

BoundReport InjectedExpertCertification(PayoffKind kind, MdpFamily family,
                                        int horizon) {
  BuiltMdp built = BuildFamily(family, horizon);
  GameSpec game = UpperBoundGame(kind, built, 0);
  BoundReport r;
  r.experiment = UpperExperiment(kind);
  r.instance = Instance(ToString(family), horizon) + "/" + ToString(kind) +
               "/injected-expert";
  r.parameters = {{"T", horizon}, {"delta", 0.0}, {"H", game.recoverability}};
  double sup = BestResponseDiscriminator(game, built.expert).sup_payoff;
  r.measured_gap = PolicyValue(built.mdp, built.expert) -
                   PolicyValue(built.mdp, built.expert);
  r.bound_value = 0.0;
  r.extras = {{"certified_sup", sup}};
  r.satisfied = sup <= kBoundTolerance && std::abs(r.measured_gap) <= 0.0;
  r.note = "expert injected at delta = 0";
  return r;
}

double FamilyRecoverability(MdpFamily family, int horizon) {
  if (family == MdpFamily::kTree) return TreeRecoverability(2, horizon, true);
  BuiltMdp built = BuildFamily(family, horizon);
  if (family == MdpFamily::kCliff) {
    return RecoverabilityH(built.expert, CliffCostExpertQClass(built));
  }
  FunctionClass qe = InduceExpertQClass(built.mdp, built.expert,
                                        DefaultRewardClass(built.mdp));
  return RecoverabilityH(built.expert, qe);
}

std::vector<BoundReport> RecoverabilitySweep(const std::vector<int>& horizons) {
  std::vector<BoundReport> out;
  for (MdpFamily family : {MdpFamily::kLoop, MdpFamily::kCliff,
                           MdpFamily::kUnicycle, MdpFamily::kTree}) {
    for (int T : horizons) {
      BoundReport r;
      r.experiment = Experiment::kRecoverability;
      r.instance = Instance(ToString(family), T);
      r.parameters = {{"T", T}};
      double h = FamilyRecoverability(family, T);
      r.measured_gap = h;
      r.extras = {{"H", h}};
      switch (family) {
        case MdpFamily::kLoop:
          r.bound_value = 1.0;
          r.satisfied = std::abs(h - 1.0) <= kBoundTolerance;
          r.note = "H = 1 expected";
          break;
        case MdpFamily::kCliff:
          r.bound_value = T - 1.0;
          r.satisfied = h >= T - 1.0 - kBoundTolerance;
          r.note = "H >= T - 1 expected (unscaled cost basis)";
          break;
        default:
          r.bound_value = h;
          r.satisfied = true;
          r.note = "recorded";
          break;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<BoundReport> RunSuite(const std::string& suite) {
  if (suite != "all" && suite != "lb" && suite != "ub" && suite != "lemma6" &&
      suite != "recover") {
    throw std::invalid_argument("unknown suite: " + suite);
  }
  const bool all = suite == "all";
  std::vector<BoundReport> out;
  auto append = [&](std::vector<BoundReport> more) {
    for (BoundReport& r : more) out.push_back(std::move(r));
  };
  if (all || suite == "lb") {
    const std::vector<std::pair<int, double>> grid{
        {5, 0.2}, {10, 0.1}, {20, 0.05}};
    for (auto [T, eps] : grid) out.push_back(RewardLowerBound(T, eps));
    for (auto [T, eps] : grid) out.push_back(OffqLowerBound(T, eps));
    for (auto [T, eps] : grid) out.push_back(OnqLowerBound(T, eps));
  }
  if (all || suite == "lemma6") {
    for (int T : {1, 2, 3, 4, 8, 16, 32, 64}) {
      out.push_back(Lemma6Study(T, 0.1));
    }
    for (int T : {4, 8}) out.push_back(Lemma6Growth(T, 0.1));
  }
  if (all || suite == "ub") {
    const std::vector<std::uint64_t> seeds{0, 1, 2};
    append(UpperBoundCertification(PayoffKind::kU1Reward, MdpFamily::kLoop, 6,
                                   0.05, seeds));
    append(UpperBoundCertification(PayoffKind::kU3OnQ, MdpFamily::kLoop, 6,
                                   0.05, seeds));
    append(UpperBoundCertification(PayoffKind::kU1Reward, MdpFamily::kCliff, 8,
                                   0.05, seeds));
    append(UpperBoundCertification(PayoffKind::kU2OffQ, MdpFamily::kCliff, 8,
                                   0.05, seeds));
    append(UpperBoundCertification(PayoffKind::kU4Mixed, MdpFamily::kLoop, 6,
                                   0.05, seeds));
    append(UpperBoundCertification(PayoffKind::kU4Mixed, MdpFamily::kCliff, 8,
                                   0.05, seeds));
    for (PayoffKind kind : {PayoffKind::kU1Reward, PayoffKind::kU2OffQ,
                            PayoffKind::kU3OnQ, PayoffKind::kU4Mixed}) {
      out.push_back(InjectedExpertCertification(kind, MdpFamily::kCliff, 8));
    }
  }
  if (all || suite == "recover") append(RecoverabilitySweep());
  return out;
}

std::string MarkdownSummary(const std::vector<BoundReport>& reports) {
  struct Group {
    const char* title;
    std::vector<Experiment> members;
  };
  const std::vector<Group> groups{
      {"Reward moments", {Experiment::kRewardLB, Experiment::kRewardUB}},
      {"Off-policy Q moments", {Experiment::kOffQLB, Experiment::kOffQUB}},
      {"On-policy Q moments", {Experiment::kOnQLB, Experiment::kOnQUB}},
      {"Mixed moments", {Experiment::kMixedUB}},
      {"Compounding error (unicycle)", {Experiment::kLemma6}},
      {"Recoverability", {Experiment::kRecoverability}},
  };
  std::ostringstream md;
  md << "| moments | experiment | instance | measured | bound | satisfied |\n";
  md << "|---|---|---|---|---|---|\n";
  for (const Group& g : groups) {
    for (const BoundReport& r : reports) {
      bool member = false;
      for (Experiment e : g.members) member = member || e == r.experiment;
      if (!member) continue;
      md << "| " << g.title << " | " << ToString(r.experiment) << " | "
         << r.instance << " | " << Fmt(r.measured_gap) << " | "
         << Fmt(r.bound_value) << " | " << (r.satisfied ? "yes" : "no")
         << " |\n";
    }
  }
  int ok = 0;
  for (const BoundReport& r : reports) ok += r.satisfied ? 1 : 0;
  md << "\n" << ok << " of " << reports.size() << " reports satisfied.\n";
  return md.str();
}

}  // namespace mmil
