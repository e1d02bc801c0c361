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

#ifndef MMIL_ALGORITHMS_H_
#define MMIL_ALGORITHMS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmil/builders.h"
#include "mmil/mdp.h"
#include "mmil/moments.h"

namespace mmil {

// Expert demonstrations together with the MDP they were recorded on. The
// generating policy, when known, is only used for monitoring exact gaps.
struct ExpertDataset {
  TabularMdp mdp;
  std::vector<Trajectory> trajectories;
  std::optional<TimedPolicy> generator;

  static ExpertDataset FromRollouts(const TabularMdp& mdp,
                                    const TimedPolicy& expert,
                                    std::uint64_t seed, int n);
  void Validate() const;
  int size() const { return static_cast<int>(trajectories.size()); }
};

struct QueryableExpert {
  TimedPolicy policy;
};

// Per-(t, s, a) visit counts of a set of trajectories.
TimedTable VisitCounts(const TabularMdp& mdp,
                       const std::vector<Trajectory>& trajectories);

struct AlgoTraceRecord {
  int round = 0;
  double objective = 0.0;
  double exact_gap = 0.0;  // J(expert) - J(pi), exact; 0 if no expert known
  double sup_payoff = 0.0;
};

struct TrainResult {
  TimedPolicy policy;
  std::vector<AlgoTraceRecord> trace;
  int rounds = 0;
  bool converged = false;
  // Set by the optional AdVIL collapse detector.
  bool collapse_detected = false;
};

// ---------------------------------------------------------------------------
// Behavioral cloning.

enum class BcLoss {
  // Maximum likelihood: empirical frequencies, uniform where unvisited.
  kLogLoss,
  // Deterministic action whose embedding is nearest to the mean labelled
  // embedding; the mean-action regressor of a squared-error learner.
  kSquaredError,
};

std::string ToString(BcLoss loss);
BcLoss ParseBcLoss(const std::string& name);

struct BcConfig {
  BcLoss loss = BcLoss::kLogLoss;
  // One scalar embedding per action; empty means the action index.
  std::vector<double> action_embedding;
};

// Fits a policy to labelled (t, s, a) triples given as counts.
TimedPolicy FitFromCounts(const TimedTable& counts, const BcConfig& config);
TimedPolicy BehavioralCloning(const ExpertDataset& data,
                              const BcConfig& config = {});

// ---------------------------------------------------------------------------
// AdVIL.

// (v - B^pi v)_t(s, a) = v_t(s, a) - E_{s'} E_{a' ~ pi_{t+1}} v_{t+1}(s', a').
TimedTable BellmanResidual(const TabularMdp& mdp, const TimedPolicy& policy,
                           const TimedTable& v);
// (1/T) sum_t E_{s ~ expert}[E_{a ~ pi} v - E_{a ~ expert} v].
double AdvilObjective(const TabularMdp& mdp, const TimedPolicy& expert,
                      const TimedPolicy& policy, const TimedTable& v);
// (1/T) sum_t (E_{d_pi} f - E_{d_expert} f).
double IpmObjective(const TabularMdp& mdp, const TimedPolicy& expert,
                    const TimedPolicy& policy, const TimedTable& f);

struct AdvilConfig {
  double eta_f = 20.0;
  double eta_pi = 2.0;
  double delta = 0.05;
  int max_steps = 5000;
  bool exact_inner = false;
  bool init_from_data = false;
  // Loss-collapse detector: 0 disables it.
  int collapse_window = 0;
  double collapse_factor = 10.0;

  void Validate() const;
};

// Alternating ascent on a tabular v clipped to [-T, T] and descent on softmax
// logits. Stops once sup_v L(pi, v) over the box drops to delta.
TrainResult AdvilTrain(const ExpertDataset& data, const AdvilConfig& config);

// ---------------------------------------------------------------------------
// AdRIL.

struct AdrilConfig {
  // Rounds between discriminator refreshes; 0 freezes it after round one.
  int f_update_freq = 1;
  double alpha = 0.01;
  double delta = 0.05;
  int max_rounds = 50;
  int rollouts_per_round = 10;
  bool balanced_sampling = false;
  // Sum the indicator over time instead of keeping it per timestep.
  bool stationary_kernel = false;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct AdrilState {
  std::vector<Trajectory> aggregated_learner_data;
  const ExpertDataset* expert_data = nullptr;
  int round = 0;
  TimedTable cost_table;
  // Learner trajectories that entered the last cost refresh.
  int cost_snapshot = 0;
  bool stationary_kernel = false;
};

// Averaged functional-gradient cost from scratch, one trajectory at a time.
TimedTable AdrilCost(const TabularMdp& mdp,
                     const std::vector<Trajectory>& learner,
                     const std::vector<Trajectory>& expert,
                     bool stationary_kernel);
// Max absolute deviation of the state's cost table from a recomputation.
double AdrilInvariantResidual(const AdrilState& state);
// sum_t || d_pi_t - empirical expert d_t ||_1.
double IndicatorIpm(const TabularMdp& mdp, const TimedPolicy& policy,
                    const TimedTable& expert_occupancy);

struct AdrilResult {
  TrainResult train;
  AdrilState state;
  double final_ipm = 0.0;
  double max_invariant_residual = 0.0;
};

AdrilResult AdrilTrain(const ExpertDataset& data, const AdrilConfig& config);

// ---------------------------------------------------------------------------
// DAeQuIL and DAgger.

struct DaequilConfig {
  double delta = 0.05;
  int max_rounds = 10;
  double bc_weight = 1.0;
  double reg_weight = 1e-6;
  int rollouts_per_round = 10;
  int max_gd_iters = 20000;
  double gd_tolerance = 1e-9;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct DaequilResult {
  TrainResult train;
  std::vector<double> round_losses;        // l_t(pi^t)
  std::vector<double> round_max_payoffs;   // max_f of the round payoff
  double max_identity_residual = 0.0;
  std::vector<int> round_vertices;
};

// Round payoff of each vertex: mean over sampled (t, s) of
// E_{a ~ pi} f - E_{a ~ expert} f.
std::vector<double> RoundVertexPayoffs(const FunctionClass& cls,
                                       const TimedPolicy& policy,
                                       const TimedPolicy& expert,
                                       const std::vector<Trajectory>& data);

DaequilResult DaequilTrain(const TabularMdp& mdp, const QueryableExpert& expert,
                           const FunctionClass& cls,
                           const DaequilConfig& config);

struct DaggerConfig {
  int rounds = 10;
  int rollouts_per_round = 10;
  BcConfig bc;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct DaggerResult {
  TrainResult train;
  std::vector<int> aggregate_sizes;  // labelled samples after each round
};

DaggerResult DaggerTrain(const TabularMdp& mdp, const QueryableExpert& expert,
                         const DaggerConfig& config);

// threat(s) * |lateral(a)|: the heading-change moment of the forest task.
FunctionClass ForestSwerveClass(const ForestGrid& grid);

}  // namespace mmil

#endif  // MMIL_ALGORITHMS_H_
