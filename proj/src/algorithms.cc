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

#include "mmil/algorithms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "mmil/equilibrium.h"

namespace mmil {
namespace {

// Stream tags so that rollouts and relabelling never share a seed.
constexpr std::uint64_t kRelabelStream = 0x5eed0f2a11ab1e00ULL;
constexpr std::uint64_t kBalanceStream = 0xba1a9ced5a3b1e00ULL;

double GapOrZero(const TabularMdp& mdp, const std::optional<TimedPolicy>& ref,
                 const TimedPolicy& policy) {
  if (!ref) return 0.0;
  return PolicyValue(mdp, *ref) - PolicyValue(mdp, policy);
}

void Softmax(const double* logits, double* out, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) m = std::max(m, logits[a]);
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    out[a] = std::exp(logits[a] - m);
    total += out[a];
  }
  for (int a = 0; a < n; ++a) out[a] /= total;
}

TimedPolicy PolicyFromLogits(const TimedTable& logits) {
  TimedPolicy pi(TimedTable(logits.horizon, logits.n_states, logits.n_actions));
  const int A = logits.n_actions;
  for (std::size_t i = 0; i < logits.data.size(); i += A) {
    Softmax(&logits.data[i], &pi.probs.data[i], A);
  }
  return pi;
}

// Relabels every visited (t, s) of the trajectories with a sampled expert
// action and adds the labels to counts.
void AddRelabelledCounts(const TimedPolicy& expert,
                         const std::vector<Trajectory>& trajectories,
                         std::uint64_t seed, TimedTable& counts) {
  std::mt19937_64 rng(seed);
  const int A = expert.n_actions();
  for (const Trajectory& tr : trajectories) {
    for (int t = 0; t < static_cast<int>(tr.steps.size()); ++t) {
      int s = tr.steps[t].first;
      const std::size_t row =
          (static_cast<std::size_t>(t) * expert.n_states() + s) * A;
      int a = SampleIndex(rng, &expert.probs.data[row], A);
      counts(t, s, a) += 1.0;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ExpertDataset ExpertDataset::FromRollouts(const TabularMdp& mdp,
                                          const TimedPolicy& expert,
                                          std::uint64_t seed, int n) {
  if (n < 1) throw std::invalid_argument("expert dataset: n must be >= 1");
  ExpertDataset data{mdp, Rollout(mdp, expert, seed, n), expert};
  data.Validate();
  return data;
}

void ExpertDataset::Validate() const {
  if (trajectories.empty()) {
    throw std::invalid_argument("expert dataset is empty");
  }
  for (const Trajectory& tr : trajectories) {
    if (static_cast<int>(tr.steps.size()) != mdp.horizon) {
      throw std::invalid_argument("expert trajectory length differs from T");
    }
    for (auto [s, a] : tr.steps) {
      if (s < 0 || s >= mdp.n_states || a < 0 || a >= mdp.n_actions) {
        throw std::invalid_argument("expert trajectory index out of range");
      }
    }
  }
  if (generator) CheckCompatible(mdp, *generator);
}

TimedTable VisitCounts(const TabularMdp& mdp,
                       const std::vector<Trajectory>& trajectories) {
  TimedTable counts(mdp.horizon, mdp.n_states, mdp.n_actions, 0.0);
  for (const Trajectory& tr : trajectories) {
    for (int t = 0; t < static_cast<int>(tr.steps.size()); ++t) {
      counts(t, tr.steps[t].first, tr.steps[t].second) += 1.0;
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------

std::string ToString(BcLoss loss) {
  return loss == BcLoss::kLogLoss ? "log_loss" : "squared_error";
}

BcLoss ParseBcLoss(const std::string& name) {
  if (name == "log_loss") return BcLoss::kLogLoss;
  if (name == "squared_error") return BcLoss::kSquaredError;
  throw std::invalid_argument("unknown bc loss: " + name);
}

TimedPolicy FitFromCounts(const TimedTable& counts, const BcConfig& config) {
  const int T = counts.horizon, S = counts.n_states, A = counts.n_actions;
  std::vector<double> emb = config.action_embedding;
  if (emb.empty()) {
    for (int a = 0; a < A; ++a) emb.push_back(a);
  }
  if (static_cast<int>(emb.size()) != A) {
    throw std::invalid_argument("bc: action embedding size differs from |A|");
  }
  TimedPolicy pi(TimedTable(T, S, A, 0.0));
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double n = 0.0;
      for (int a = 0; a < A; ++a) n += counts(t, s, a);
      if (config.loss == BcLoss::kLogLoss) {
        // A unit pseudo-count on an unvisited cell yields the uniform policy.
        for (int a = 0; a < A; ++a) {
          pi(t, s, a) = n > 0.0 ? counts(t, s, a) / n : 1.0 / A;
        }
        continue;
      }
      double mean = 0.0;
      for (int a = 0; a < A; ++a) {
        mean += (n > 0.0 ? counts(t, s, a) / n : 1.0 / A) * emb[a];
      }
      int best = 0;
      for (int a = 1; a < A; ++a) {
        if (std::abs(emb[a] - mean) < std::abs(emb[best] - mean) - 1e-12) {
          best = a;
        }
      }
      pi(t, s, best) = 1.0;
    }
  }
  return pi;
}

TimedPolicy BehavioralCloning(const ExpertDataset& data,
                              const BcConfig& config) {
  data.Validate();
  return FitFromCounts(VisitCounts(data.mdp, data.trajectories), config);
}

// ---------------------------------------------------------------------------

TimedTable BellmanResidual(const TabularMdp& mdp, const TimedPolicy& policy,
                           const TimedTable& v) {
  CheckCompatible(mdp, policy);
  if (!v.SameShape(policy.probs)) {
    throw std::invalid_argument("bellman residual: shape mismatch");
  }
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;
  TimedStateTable next(T, S, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) next(t, s) += policy(t, s, a) * v(t, s, a);
    }
  }
  TimedTable f = v;
  for (int t = 0; t + 1 < T; ++t) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double backup = 0.0;
        for (int sp = 0; sp < S; ++sp) backup += mdp.P(s, a, sp) * next(t + 1, sp);
        f(t, s, a) -= backup;
      }
    }
  }
  return f;
}

double AdvilObjective(const TabularMdp& mdp, const TimedPolicy& expert,
                      const TimedPolicy& policy, const TimedTable& v) {
  CheckCompatible(mdp, expert);
  CheckCompatible(mdp, policy);
  TimedStateTable rho = Occupancy(mdp, expert).StateMarginal();
  double total = 0.0;
  for (int t = 0; t < mdp.horizon; ++t) {
    for (int s = 0; s < mdp.n_states; ++s) {
      if (rho(t, s) == 0.0) continue;
      double diff = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        diff += (policy(t, s, a) - expert(t, s, a)) * v(t, s, a);
      }
      total += rho(t, s) * diff;
    }
  }
  return total / mdp.horizon;
}

double IpmObjective(const TabularMdp& mdp, const TimedPolicy& expert,
                    const TimedPolicy& policy, const TimedTable& f) {
  OccupancyMeasure dp = Occupancy(mdp, policy);
  OccupancyMeasure de = Occupancy(mdp, expert);
  if (!f.SameShape(dp.d)) throw std::invalid_argument("ipm: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    total += (dp.d.data[i] - de.d.data[i]) * f.data[i];
  }
  return total / mdp.horizon;
}

void AdvilConfig::Validate() const {
  if (!(eta_f > eta_pi) || !(eta_pi > 0.0)) {
    throw std::invalid_argument("advil: requires eta_f > eta_pi > 0");
  }
  if (!(delta >= 0.0)) throw std::invalid_argument("advil: delta must be >= 0");
  if (max_steps < 1) throw std::invalid_argument("advil: max_steps must be >= 1");
  if (collapse_window < 0 || !(collapse_factor > 1.0)) {
    throw std::invalid_argument("advil: bad collapse detector settings");
  }
}

TrainResult AdvilTrain(const ExpertDataset& data, const AdvilConfig& config) {
  config.Validate();
  data.Validate();
  const TabularMdp& mdp = data.mdp;
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;

  // Expert state weights and action conditionals.
  TimedStateTable rho(T, S, 0.0);
  TimedTable cond(T, S, A, 0.0);
  if (config.exact_inner) {
    if (!data.generator) {
      throw std::invalid_argument("advil: exact_inner needs the expert policy");
    }
    rho = Occupancy(mdp, *data.generator).StateMarginal();
    cond = data.generator->probs;
  } else {
    TimedTable counts = VisitCounts(mdp, data.trajectories);
    const double n = data.size();
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        double visits = 0.0;
        for (int a = 0; a < A; ++a) visits += counts(t, s, a);
        rho(t, s) = visits / n;
        for (int a = 0; a < A; ++a) {
          cond(t, s, a) = visits > 0.0 ? counts(t, s, a) / visits : 1.0 / A;
        }
      }
    }
  }

  TimedTable logits(T, S, A, 0.0);
  if (config.init_from_data) {
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        if (rho(t, s) == 0.0) continue;
        for (int a = 0; a < A; ++a) logits(t, s, a) = std::log(cond(t, s, a));
      }
    }
  }
  TimedTable v(T, S, A, 0.0);
  const double bound = T;

  TrainResult result;
  std::vector<double> losses;
  for (int step = 1; step <= config.max_steps; ++step) {
    TimedPolicy pi = PolicyFromLogits(logits);
    double loss = 0.0, sup = 0.0;
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        if (rho(t, s) == 0.0) continue;
        double l1 = 0.0;
        for (int a = 0; a < A; ++a) {
          double diff = pi(t, s, a) - cond(t, s, a);
          loss += rho(t, s) * diff * v(t, s, a);
          l1 += std::abs(diff);
        }
        sup += rho(t, s) * l1;
      }
    }
    loss /= T;
    // The box [-T, T] gives sup_v L = (1/T) * T * sum rho * ||pi - cond||_1.
    result.trace.push_back(
        AlgoTraceRecord{step, loss, GapOrZero(mdp, data.generator, pi), sup});
    result.policy = pi;
    result.rounds = step;
    if (sup <= config.delta) {
      result.converged = true;
      break;
    }
    losses.push_back(loss);
    const int w = config.collapse_window;
    if (w > 0 && static_cast<int>(losses.size()) >= 2 * w) {
      auto variance = [&](int begin) {
        double m = 0.0, q = 0.0;
        for (int i = begin; i < begin + w; ++i) m += losses[i];
        m /= w;
        for (int i = begin; i < begin + w; ++i) {
          q += (losses[i] - m) * (losses[i] - m);
        }
        return q / w;
      };
      int n = static_cast<int>(losses.size());
      double recent = variance(n - w), before = variance(n - 2 * w);
      if (before > 0.0 && recent > config.collapse_factor * before) {
        result.collapse_detected = true;
        break;
      }
    }

    // Ascent on v, then descent on the logits against the updated v.
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        if (rho(t, s) == 0.0) continue;
        double scale = rho(t, s) / T;
        for (int a = 0; a < A; ++a) {
          double g = scale * (pi(t, s, a) - cond(t, s, a));
          v(t, s, a) = std::clamp(v(t, s, a) + config.eta_f * g, -bound, bound);
        }
        double mean = 0.0;
        for (int a = 0; a < A; ++a) mean += pi(t, s, a) * v(t, s, a);
        for (int a = 0; a < A; ++a) {
          if (pi(t, s, a) == 0.0) continue;
          logits(t, s, a) -=
              config.eta_pi * scale * pi(t, s, a) * (v(t, s, a) - mean);
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

void AdrilConfig::Validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("adril: alpha must be > 0");
  if (f_update_freq < 0) {
    throw std::invalid_argument("adril: f_update_freq must be >= 0");
  }
  if (!(delta >= 0.0)) throw std::invalid_argument("adril: delta must be >= 0");
  if (max_rounds < 1 || rollouts_per_round < 1) {
    throw std::invalid_argument("adril: rounds and rollouts must be >= 1");
  }
}

TimedTable AdrilCost(const TabularMdp& mdp,
                     const std::vector<Trajectory>& learner,
                     const std::vector<Trajectory>& expert,
                     bool stationary_kernel) {
  const int T = mdp.horizon;
  TimedTable cost(T, mdp.n_states, mdp.n_actions, 0.0);
  auto add = [&](const std::vector<Trajectory>& set, double sign) {
    if (set.empty()) return;
    const double w = sign / static_cast<double>(set.size());
    for (const Trajectory& tr : set) {
      for (int t = 0; t < T; ++t) {
        auto [s, a] = tr.steps[t];
        if (stationary_kernel) {
          for (int u = 0; u < T; ++u) cost(u, s, a) += w;
        } else {
          cost(t, s, a) += w;
        }
      }
    }
  };
  add(learner, 1.0);
  add(expert, -1.0);
  return cost;
}

double AdrilInvariantResidual(const AdrilState& state) {
  if (state.expert_data == nullptr) {
    throw std::invalid_argument("adril state has no expert data");
  }
  std::vector<Trajectory> used(
      state.aggregated_learner_data.begin(),
      state.aggregated_learner_data.begin() + state.cost_snapshot);
  TimedTable ref = AdrilCost(state.expert_data->mdp, used,
                             state.expert_data->trajectories,
                             state.stationary_kernel);
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.data.size(); ++i) {
    worst = std::max(worst, std::abs(ref.data[i] - state.cost_table.data[i]));
  }
  return worst;
}

double IndicatorIpm(const TabularMdp& mdp, const TimedPolicy& policy,
                    const TimedTable& expert_occupancy) {
  OccupancyMeasure occ = Occupancy(mdp, policy);
  if (!occ.d.SameShape(expert_occupancy)) {
    throw std::invalid_argument("indicator ipm: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < occ.d.data.size(); ++i) {
    total += std::abs(occ.d.data[i] - expert_occupancy.data[i]);
  }
  return total;
}

AdrilResult AdrilTrain(const ExpertDataset& data, const AdrilConfig& config) {
  config.Validate();
  data.Validate();
  const TabularMdp& mdp = data.mdp;
  const int T = mdp.horizon;

  TimedTable expert_counts = VisitCounts(mdp, data.trajectories);
  TimedTable expert_occ = expert_counts.Scaled(1.0 / data.size());
  // Incrementally maintained sums; the invariant check recomputes from data.
  TimedTable learner_sums(T, mdp.n_states, mdp.n_actions, 0.0);
  TimedTable expert_sums = expert_counts;
  if (config.stationary_kernel) {
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
          double total = 0.0;
          for (int u = 0; u < T; ++u) total += expert_counts(u, s, a);
          expert_sums(t, s, a) = total;
        }
      }
    }
  }

  AdrilResult out;
  AdrilState& state = out.state;
  state.expert_data = &data;
  state.stationary_kernel = config.stationary_kernel;
  state.cost_table = TimedTable(T, mdp.n_states, mdp.n_actions, 0.0);

  TimedPolicy pi = TimedPolicy::Uniform(T, mdp.n_states, mdp.n_actions);
  for (int k = 1; k <= config.max_rounds; ++k) {
    state.round = k;
    bool refresh = k == 1 || (config.f_update_freq > 0 &&
                              (k - 1) % config.f_update_freq == 0);
    if (refresh) {
      const int n = static_cast<int>(state.aggregated_learner_data.size());
      for (std::size_t i = 0; i < state.cost_table.data.size(); ++i) {
        double learner = n > 0 ? learner_sums.data[i] / n : 0.0;
        state.cost_table.data[i] = learner - expert_sums.data[i] / data.size();
      }
      state.cost_snapshot = n;
    }
    out.max_invariant_residual =
        std::max(out.max_invariant_residual, AdrilInvariantResidual(state));

    pi = SoftValueIteration(mdp, state.cost_table, config.alpha).policy;
    std::vector<Trajectory> fresh =
        Rollout(mdp, pi, SplitSeed(config.seed, k), config.rollouts_per_round);
    if (config.balanced_sampling) {
      std::mt19937_64 rng(SplitSeed(config.seed ^ kBalanceStream, k));
      for (Trajectory& tr : fresh) {
        if (UniformUnit(rng) < 0.5) {
          std::uniform_int_distribution<int> pick(0, data.size() - 1);
          tr = data.trajectories[pick(rng)];
        }
      }
    }
    for (const Trajectory& tr : fresh) {
      for (int t = 0; t < T; ++t) {
        auto [s, a] = tr.steps[t];
        if (config.stationary_kernel) {
          for (int u = 0; u < T; ++u) learner_sums(u, s, a) += 1.0;
        } else {
          learner_sums(t, s, a) += 1.0;
        }
      }
      state.aggregated_learner_data.push_back(tr);
    }

    // Exact learner side against the demonstrations, current cost.
    OccupancyMeasure occ = Occupancy(mdp, pi);
    double loss = 0.0;
    for (std::size_t i = 0; i < occ.d.data.size(); ++i) {
      loss += (occ.d.data[i] - expert_occ.data[i]) * state.cost_table.data[i];
    }
    double ipm = IndicatorIpm(mdp, pi, expert_occ);
    out.train.trace.push_back(
        AlgoTraceRecord{k, loss, GapOrZero(mdp, data.generator, pi), ipm});
    out.train.rounds = k;
    out.final_ipm = ipm;
    if (loss <= config.delta) {
      out.train.converged = true;
      break;
    }
  }
  out.train.policy = pi;
  return out;
}

// ---------------------------------------------------------------------------

void DaequilConfig::Validate() const {
  if (!(delta >= 0.0)) throw std::invalid_argument("daequil: delta must be >= 0");
  if (max_rounds < 1 || rollouts_per_round < 1) {
    throw std::invalid_argument("daequil: rounds and rollouts must be >= 1");
  }
  if (bc_weight < 0.0 || !(reg_weight > 0.0)) {
    throw std::invalid_argument("daequil: need bc_weight >= 0, reg_weight > 0");
  }
  if (max_gd_iters < 1 || !(gd_tolerance > 0.0)) {
    throw std::invalid_argument("daequil: bad optimiser settings");
  }
}

std::vector<double> RoundVertexPayoffs(const FunctionClass& cls,
                                       const TimedPolicy& policy,
                                       const TimedPolicy& expert,
                                       const std::vector<Trajectory>& data) {
  std::vector<double> out(cls.NumVertices(), 0.0);
  long long samples = 0;
  const int A = policy.n_actions();
  for (int v = 0; v < cls.NumVertices(); ++v) {
    TimedTable f = cls.Vertex(v);
    samples = 0;
    double total = 0.0;
    for (const Trajectory& tr : data) {
      for (int t = 0; t < static_cast<int>(tr.steps.size()); ++t) {
        int s = tr.steps[t].first;
        for (int a = 0; a < A; ++a) {
          total += (policy(t, s, a) - expert(t, s, a)) * f(t, s, a);
        }
        ++samples;
      }
    }
    out[v] = samples > 0 ? total / samples : 0.0;
  }
  return out;
}

namespace {

// Minimises, independently on every (t, s), the aggregate loss
//   pi . m + bc * sum_a b_a (-log pi_a) + reg * ||theta||^2
// by gradient descent with a per-cell step from a curvature bound.
void MinimiseAggregate(const TimedTable& moment, const TimedTable& labels,
                       const DaequilConfig& config, TimedTable& logits) {
  const int A = logits.n_actions;
  std::vector<double> pi(A), grad(A);
  for (std::size_t base = 0; base < logits.data.size(); base += A) {
    const double* m = &moment.data[base];
    const double* b = &labels.data[base];
    double* theta = &logits.data[base];
    double mass = 0.0, lo = m[0], hi = m[0];
    for (int a = 0; a < A; ++a) {
      mass += b[a];
      lo = std::min(lo, m[a]);
      hi = std::max(hi, m[a]);
    }
    const double step = 1.0 / (0.5 * config.bc_weight * mass +
                               2.0 * (hi - lo) + 2.0 * config.reg_weight);
    for (int it = 0; it < config.max_gd_iters; ++it) {
      Softmax(theta, pi.data(), A);
      double mean = 0.0;
      for (int a = 0; a < A; ++a) mean += pi[a] * m[a];
      double worst = 0.0;
      for (int a = 0; a < A; ++a) {
        grad[a] = pi[a] * (m[a] - mean) +
                  config.bc_weight * (pi[a] * mass - b[a]) +
                  2.0 * config.reg_weight * theta[a];
        worst = std::max(worst, std::abs(grad[a]));
      }
      if (worst <= config.gd_tolerance) break;
      for (int a = 0; a < A; ++a) theta[a] -= step * grad[a];
    }
  }
}

}  // namespace

DaequilResult DaequilTrain(const TabularMdp& mdp, const QueryableExpert& expert,
                           const FunctionClass& cls,
                           const DaequilConfig& config) {
  config.Validate();
  mdp.Validate();
  expert.policy.Validate();
  CheckCompatible(mdp, expert.policy);
  cls.Validate();
  if (!cls.basis.front().SameShape(expert.policy.probs)) {
    throw std::invalid_argument("daequil: class shape does not match mdp");
  }
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;
  const int n = config.rollouts_per_round;

  // Warm start: cross-entropy fit to expert demonstrations.
  TimedTable labels = VisitCounts(
      mdp, Rollout(mdp, expert.policy, SplitSeed(config.seed, 0), n));
  double label_total = static_cast<double>(n) * T;
  TimedTable moment_sum(T, S, A, 0.0);
  double moment_total = 0.0;
  TimedTable logits(T, S, A, 0.0);
  {
    TimedTable zero(T, S, A, 0.0);
    MinimiseAggregate(zero, labels.Scaled(1.0 / label_total), config, logits);
  }

  DaequilResult out;
  TimedPolicy pi = PolicyFromLogits(logits);
  for (int round = 1; round <= config.max_rounds; ++round) {
    std::vector<Trajectory> rollouts =
        Rollout(mdp, pi, SplitSeed(config.seed, round), n);
    AddRelabelledCounts(expert.policy, rollouts,
                        SplitSeed(config.seed ^ kRelabelStream, round), labels);
    label_total += static_cast<double>(n) * T;

    std::vector<double> payoffs =
        RoundVertexPayoffs(cls, pi, expert.policy, rollouts);
    int vertex = 0;
    for (int v = 1; v < static_cast<int>(payoffs.size()); ++v) {
      if (payoffs[v] > payoffs[vertex]) vertex = v;
    }
    TimedTable f = cls.Vertex(vertex);

    // The round's term of the aggregate loss, evaluated at pi itself.
    TimedTable round_coef(T, S, A, 0.0);
    for (const Trajectory& tr : rollouts) {
      for (int t = 0; t < T; ++t) {
        int s = tr.steps[t].first;
        for (int a = 0; a < A; ++a) round_coef(t, s, a) += f(t, s, a);
      }
    }
    const double round_samples = static_cast<double>(n) * T;
    double round_loss = 0.0;
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          double c = round_coef(t, s, a) / round_samples;
          round_loss += c * (pi(t, s, a) - expert.policy(t, s, a));
        }
      }
    }
    out.round_losses.push_back(round_loss);
    out.round_max_payoffs.push_back(payoffs[vertex]);
    out.round_vertices.push_back(vertex);
    out.max_identity_residual = std::max(
        out.max_identity_residual, std::abs(round_loss - payoffs[vertex]));
    out.train.trace.push_back(
        AlgoTraceRecord{round, round_loss, PolicyValue(mdp, expert.policy) -
                                               PolicyValue(mdp, pi),
                        payoffs[vertex]});
    out.train.rounds = round;
    if (round_loss <= config.delta) {
      out.train.converged = true;
      break;
    }

    for (std::size_t i = 0; i < moment_sum.data.size(); ++i) {
      moment_sum.data[i] += round_coef.data[i];
    }
    moment_total += round_samples;
    MinimiseAggregate(moment_sum.Scaled(1.0 / moment_total),
                      labels.Scaled(1.0 / label_total), config, logits);
    pi = PolicyFromLogits(logits);
  }
  out.train.policy = pi;
  return out;
}

void DaggerConfig::Validate() const {
  if (rounds < 0 || rollouts_per_round < 1) {
    throw std::invalid_argument("dagger: need rounds >= 0, rollouts >= 1");
  }
}

DaggerResult DaggerTrain(const TabularMdp& mdp, const QueryableExpert& expert,
                         const DaggerConfig& config) {
  config.Validate();
  mdp.Validate();
  expert.policy.Validate();
  CheckCompatible(mdp, expert.policy);
  const int n = config.rollouts_per_round;
  OccupancyMeasure expert_occ = Occupancy(mdp, expert.policy);
  const double expert_value = PolicyValue(mdp, expert.policy);

  DaggerResult out;
  TimedTable counts = VisitCounts(
      mdp, Rollout(mdp, expert.policy, SplitSeed(config.seed, 0), n));
  TimedPolicy pi = FitFromCounts(counts, config.bc);
  auto record = [&](int round) {
    double total = 0.0, loss = 0.0;
    for (std::size_t i = 0; i < counts.data.size(); ++i) {
      total += counts.data[i];
      // Empirical disagreement with the labels under the fitted policy.
      loss += counts.data[i] * (1.0 - pi.probs.data[i]);
    }
    out.aggregate_sizes.push_back(static_cast<int>(total));
    out.train.trace.push_back(
        AlgoTraceRecord{round, loss / total,
                        expert_value - PolicyValue(mdp, pi),
                        IndicatorIpm(mdp, pi, expert_occ.d)});
    out.train.rounds = round;
  };
  record(0);
  for (int round = 1; round <= config.rounds; ++round) {
    std::vector<Trajectory> rollouts =
        Rollout(mdp, pi, SplitSeed(config.seed, round), n);
    AddRelabelledCounts(expert.policy, rollouts,
                        SplitSeed(config.seed ^ kRelabelStream, round), counts);
    pi = FitFromCounts(counts, config.bc);
    record(round);
  }
  out.train.policy = pi;
  return out;
}

FunctionClass ForestSwerveClass(const ForestGrid& grid) {
  const TabularMdp& mdp = grid.built.mdp;
  TimedTable f(mdp.horizon, mdp.n_states, mdp.n_actions, 0.0);
  for (int t = 0; t < mdp.horizon; ++t) {
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        f(t, s, a) = grid.threat[s] * std::abs(grid.lateral[a]);
      }
    }
  }
  FunctionClass cls;
  cls.id = "swerve";
  cls.kind = ClassKind::kOnPolicyQ;
  cls.basis = {f};
  cls.labels = {"threat*|lateral|"};
  cls.range_bound = 1.0;
  cls.scale = 1.0;
  cls.Validate();
  return cls;
}

}  // namespace mmil
