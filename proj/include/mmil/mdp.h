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

#ifndef MMIL_MDP_H_
#define MMIL_MDP_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mmil/tables.h"

namespace mmil {

inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kFlowTolerance = 1e-10;
inline constexpr double kIdentityTolerance = 1e-8;
// Largest transition tensor, in entries, that an mdp may allocate.
inline constexpr long long kMaxDenseEntries = 200000000;

// Finite-horizon tabular MDP. Time is 0-based internally: step t in
// [0, horizon) corresponds to the t+1-th decision of an episode.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  std::vector<double> transition;  // [s][a][s']
  StateActionTable reward;          // [s][a], entries in [-1, 1]
  std::vector<double> initial_dist;
  std::vector<std::string> state_labels;
  std::vector<std::string> action_labels;

  TabularMdp() = default;
  TabularMdp(int ns, int na, int t);

  double& P(int s, int a, int sp) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) *
                          n_states + sp];
  }
  double P(int s, int a, int sp) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) *
                          n_states + sp];
  }

  // Throws std::invalid_argument if any invariant is violated.
  void Validate() const;
};

// Time-indexed stochastic policy pi_t(a|s).
struct TimedPolicy {
  TimedTable probs;

  TimedPolicy() = default;
  explicit TimedPolicy(TimedTable p) : probs(std::move(p)) {}

  int horizon() const { return probs.horizon; }
  int n_states() const { return probs.n_states; }
  int n_actions() const { return probs.n_actions; }
  double operator()(int t, int s, int a) const { return probs(t, s, a); }
  double& operator()(int t, int s, int a) { return probs(t, s, a); }

  static TimedPolicy Uniform(int horizon, int n_states, int n_actions);
  // Deterministic policy taking action[s] at every timestep.
  static TimedPolicy Deterministic(int horizon, int n_states, int n_actions,
                                   const std::vector<int>& action);

  void Validate() const;
};

struct Trajectory {
  std::vector<std::pair<int, int>> steps;  // (state, action) per timestep
};

struct OccupancyMeasure {
  TimedTable d;  // d[t][s][a]

  // Per-timestep state marginal sum_a d[t][s][a].
  TimedStateTable StateMarginal() const;
};

struct ValueTables {
  TimedTable q;
  TimedStateTable v;
};

void CheckCompatible(const TabularMdp& mdp, const TimedPolicy& policy);

OccupancyMeasure Occupancy(const TabularMdp& mdp, const TimedPolicy& policy);

// Exact J(pi) via occupancy measures.
double PolicyValue(const TabularMdp& mdp, const TimedPolicy& policy);
// Exact expected sum of an arbitrary time-indexed table under pi.
double ExpectedSum(const TabularMdp& mdp, const TimedPolicy& policy,
                   const TimedTable& g);
// J(pi) through the backward recursion, used as an independent check.
double PolicyValueViaQ(const TabularMdp& mdp, const TimedPolicy& policy);

ValueTables QValues(const TabularMdp& mdp, const TimedPolicy& policy,
                    const TimedTable& g);
ValueTables QValues(const TabularMdp& mdp, const TimedPolicy& policy,
                    const StateActionTable& g);

// Deterministic per-index seed derived from one experiment seed.
std::uint64_t SplitSeed(std::uint64_t seed, std::uint64_t index);
// Uniform double in [0, 1) with 53 random bits; portable across libraries.
double UniformUnit(std::mt19937_64& rng);
// Inverse-CDF draw from an unnormalised probability row.
int SampleIndex(std::mt19937_64& rng, const double* probs, int n);

std::vector<Trajectory> Rollout(const TabularMdp& mdp,
                                const TimedPolicy& policy,
                                std::uint64_t seed, int n);

// Max residual of both performance-difference expansions.
double PdlResidual(const TabularMdp& mdp, const TimedPolicy& policy_a,
                   const TimedPolicy& policy_b);

// Seeded random instances for property tests and anchor classes.
TabularMdp RandomMdp(int n_states, int n_actions, int horizon,
                     std::mt19937_64& rng);
TimedPolicy RandomPolicy(int horizon, int n_states, int n_actions,
                         std::mt19937_64& rng);

// Expected causal entropy sum_t E_{s~d_t}[H(pi_t(.|s))].
double CausalEntropy(const TabularMdp& mdp, const TimedPolicy& policy);

// L1 distance summed over every (t, s) conditional.
double ConditionalL1(const TimedPolicy& a, const TimedPolicy& b);

}  // namespace mmil

#endif  // MMIL_MDP_H_
