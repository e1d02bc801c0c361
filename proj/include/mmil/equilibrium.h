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

#ifndef MMIL_EQUILIBRIUM_H_
#define MMIL_EQUILIBRIUM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mmil/mdp.h"
#include "mmil/moments.h"

namespace mmil {

enum class SolverMode { kPrimal, kDual };

std::string ToString(SolverMode mode);
SolverMode ParseSolverMode(const std::string& name);

struct SolverConfig {
  SolverMode mode = SolverMode::kPrimal;
  double target_delta = 0.05;
  int max_outer_iters = 2000;
  // Non-positive alpha selects k * delta / (2T (ln|A| + ln|S|)).
  double alpha = 0.0;
  // Non-positive hedge_rate selects sqrt(8 ln(n) / N) for n vertices.
  double hedge_rate = 0.0;
  double pmd_rate = 1.0;
  std::uint64_t seed = 0;
  // Stop as soon as the returned candidate certifies.
  bool stop_when_certified = true;

  void Validate() const;
};

struct TraceRecord {
  int iter = 0;
  double payoff = 0.0;      // U(pi^t, f^t)
  double sup_payoff = 0.0;  // sup_f U of the current candidate
  double entropy = 0.0;     // causal entropy of pi^t
  double regret_avg = 0.0;  // average regret of the no-regret player
};

struct EquilibriumResult {
  TimedPolicy policy;
  Discriminator discriminator;
  double certified_sup = 0.0;
  double threshold = 0.0;  // delta * k
  bool certified = false;
  std::vector<TraceRecord> trace;
  int iterations = 0;
  double alpha = 0.0;
  double delta_prime = 0.0;
  double q_m = 0.0;
  double hedge_rate = 0.0;
  double hedge_bound = 0.0;  // guaranteed average regret of Hedge
  double f_regret_avg = 0.0;
};

// Default entropy weight for a game at accuracy delta.
double DefaultAlpha(const GameSpec& game, double delta);
double QmOf(const GameSpec& game);

struct SoftSolution {
  TimedPolicy policy;
  TimedTable q;        // soft Q, in reward units (-cost + continuation)
  TimedStateTable v;   // soft value
};

// Maximiser of E[-sum cost] + alpha * causal entropy by backward log-sum-exp.
SoftSolution SoftValueIteration(const TabularMdp& mdp, const TimedTable& cost,
                                double alpha);
SoftSolution SoftValueIteration(const TabularMdp& mdp,
                                const StateActionTable& cost, double alpha);

// Entropy bonus used by the regularised game: learner causal entropy, or for
// the off-policy Q game the per-state entropy weighted by expert states.
double GameEntropy(const GameSpec& game, const TimedPolicy& policy);
// argmin_pi U(pi, f) - alpha * GameEntropy(pi) for a game-class function f.
TimedPolicy BestResponsePolicy(const GameSpec& game, const TimedTable& f,
                               double alpha);
TimedPolicy BestResponsePolicy(const GameSpec& game, const Discriminator& disc,
                               double alpha);
// sup_f U(pi, f) - alpha * GameEntropy(pi).
double RegularizedObjective(const GameSpec& game, const TimedPolicy& policy,
                            double alpha);

EquilibriumResult SolvePrimal(const GameSpec& game, const SolverConfig& config);
EquilibriumResult SolveDual(const GameSpec& game, const SolverConfig& config);
EquilibriumResult Solve(const GameSpec& game, const SolverConfig& config);

inline constexpr double kInfAlpha = 1e-6;

struct EquilibriumCertificate {
  double sup_payoff = 0.0;
  double payoff = 0.0;
  double inf_payoff = 0.0;  // approximate, via a near-zero alpha response
  double policy_side_slack = 0.0;
  double discriminator_side_slack = 0.0;
  bool holds = false;
  bool inf_is_approximate = true;
};

EquilibriumCertificate CheckEquilibrium(const GameSpec& game,
                                        const TimedPolicy& policy,
                                        const Discriminator& disc,
                                        double delta);

struct GridSearchResult {
  TimedPolicy policy;
  double objective = 0.0;
  long long points = 0;
  int free_cells = 0;
};

// Brute-force minimiser of RegularizedObjective over a simplex grid. Cells in
// which every action is interchangeable are fixed to uniform.
GridSearchResult GridSearchRegularized(const GameSpec& game, double alpha,
                                       int resolution = 100,
                                       long long budget = 20000000);

struct EntropyLemmaReport {
  double alpha = 0.0;
  double delta_prime = 0.0;
  double q_m = 0.0;
  double achieved_gap = 0.0;  // regularised duality gap of pi-hat
  int dual_iters = 0;
  double l1_distance = 0.0;
  double l1_bound = 0.0;
  double sup_payoff = 0.0;
  double sup_bound = 0.0;
  bool l1_ok = false;
  bool sup_ok = false;
  long long grid_points = 0;
};

EntropyLemmaReport EntropyLemmaCheck(const GameSpec& game, double alpha,
                                     double delta_prime,
                                     int resolution = 100);

}  // namespace mmil

#endif  // MMIL_EQUILIBRIUM_H_
