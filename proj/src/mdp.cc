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

#include "mmil/mdp.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mmil {

TimedTable TimedTable::Broadcast(const StateActionTable& table, int horizon) {
  TimedTable out(horizon, table.n_states, table.n_actions);
  for (int t = 0; t < horizon; ++t) {
    std::copy(table.data.begin(), table.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(t) *
                                     table.data.size());
  }
  return out;
}

double TimedTable::MaxAbs() const {
  double m = 0.0;
  for (double x : data) m = std::max(m, std::abs(x));
  return m;
}

TimedTable TimedTable::Scaled(double factor) const {
  TimedTable out = *this;
  for (double& x : out.data) x *= factor;
  return out;
}

namespace {

std::size_t DenseEntries(int ns, int na) {
  if (ns < 0 || na < 0) throw std::invalid_argument("mdp: negative size");
  double entries = static_cast<double>(ns) * na * ns;
  if (entries > static_cast<double>(kMaxDenseEntries)) {
    throw ResourceLimitError("mdp: dense transition tensor exceeds " +
                             std::to_string(kMaxDenseEntries) + " entries");
  }
  return static_cast<std::size_t>(ns) * na * ns;
}

}  // namespace

TabularMdp::TabularMdp(int ns, int na, int t)
    : n_states(ns), n_actions(na), horizon(t),
      transition(DenseEntries(ns, na), 0.0),
      reward(ns, na, 0.0), initial_dist(ns, 0.0) {}

void TabularMdp::Validate() const {
  if (n_states <= 0 || n_actions <= 0 || horizon <= 0) {
    throw std::invalid_argument("mdp: sizes and horizon must be positive");
  }
  if (transition.size() !=
      static_cast<std::size_t>(n_states) * n_actions * n_states) {
    throw std::invalid_argument("mdp: transition tensor has wrong size");
  }
  if (reward.n_states != n_states || reward.n_actions != n_actions) {
    throw std::invalid_argument("mdp: reward table has wrong shape");
  }
  if (static_cast<int>(initial_dist.size()) != n_states) {
    throw std::invalid_argument("mdp: initial distribution has wrong size");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (int sp = 0; sp < n_states; ++sp) {
        double p = P(s, a, sp);
        if (!(p >= 0.0)) {
          throw std::invalid_argument("mdp: negative transition probability");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw std::invalid_argument("mdp: transition row (" +
                                    std::to_string(s) + "," +
                                    std::to_string(a) + ") does not sum to 1");
      }
      double r = reward(s, a);
      if (!(r >= -1.0 && r <= 1.0)) {
        throw std::invalid_argument("mdp: reward outside [-1, 1]");
      }
    }
  }
  double total = 0.0;
  for (double p : initial_dist) {
    if (!(p >= 0.0)) {
      throw std::invalid_argument("mdp: negative initial probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("mdp: initial distribution does not sum to 1");
  }
  if (!state_labels.empty() &&
      static_cast<int>(state_labels.size()) != n_states) {
    throw std::invalid_argument("mdp: state label count mismatch");
  }
  if (!action_labels.empty() &&
      static_cast<int>(action_labels.size()) != n_actions) {
    throw std::invalid_argument("mdp: action label count mismatch");
  }
}

TimedPolicy TimedPolicy::Uniform(int horizon, int n_states, int n_actions) {
  return TimedPolicy(TimedTable(horizon, n_states, n_actions, 1.0 / n_actions));
}

TimedPolicy TimedPolicy::Deterministic(int horizon, int n_states,
                                       int n_actions,
                                       const std::vector<int>& action) {
  if (static_cast<int>(action.size()) != n_states) {
    throw std::invalid_argument("policy: one action per state required");
  }
  TimedTable p(horizon, n_states, n_actions, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int s = 0; s < n_states; ++s) p(t, s, action[s]) = 1.0;
  }
  return TimedPolicy(std::move(p));
}

void TimedPolicy::Validate() const {
  if (probs.data.size() != static_cast<std::size_t>(probs.horizon) *
                               probs.n_states * probs.n_actions ||
      probs.horizon <= 0 || probs.n_states <= 0 || probs.n_actions <= 0) {
    throw std::invalid_argument("policy: malformed probability tensor");
  }
  for (int t = 0; t < horizon(); ++t) {
    for (int s = 0; s < n_states(); ++s) {
      double total = 0.0;
      for (int a = 0; a < n_actions(); ++a) {
        double p = probs(t, s, a);
        if (!(p >= 0.0)) {
          throw std::invalid_argument("policy: negative probability");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw std::invalid_argument("policy: conditional at (t=" +
                                    std::to_string(t) + ", s=" +
                                    std::to_string(s) + ") does not sum to 1");
      }
    }
  }
}

TimedStateTable OccupancyMeasure::StateMarginal() const {
  TimedStateTable out(d.horizon, d.n_states, 0.0);
  for (int t = 0; t < d.horizon; ++t) {
    for (int s = 0; s < d.n_states; ++s) {
      double m = 0.0;
      for (int a = 0; a < d.n_actions; ++a) m += d(t, s, a);
      out(t, s) = m;
    }
  }
  return out;
}

void CheckCompatible(const TabularMdp& mdp, const TimedPolicy& policy) {
  if (policy.horizon() != mdp.horizon || policy.n_states() != mdp.n_states ||
      policy.n_actions() != mdp.n_actions) {
    throw std::invalid_argument("policy shape does not match mdp");
  }
}

OccupancyMeasure Occupancy(const TabularMdp& mdp, const TimedPolicy& policy) {
  CheckCompatible(mdp, policy);
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  OccupancyMeasure occ{TimedTable(T, S, A, 0.0)};
  std::vector<double> rho(mdp.initial_dist);
  std::vector<double> next(S);
  for (int t = 0; t < T; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (rho[s] == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        double m = rho[s] * policy(t, s, a);
        occ.d(t, s, a) = m;
        if (m == 0.0) continue;
        for (int sp = 0; sp < S; ++sp) next[sp] += m * mdp.P(s, a, sp);
      }
    }
    rho.swap(next);
  }
  return occ;
}

double ExpectedSum(const TabularMdp& mdp, const TimedPolicy& policy,
                   const TimedTable& g) {
  OccupancyMeasure occ = Occupancy(mdp, policy);
  if (!g.SameShape(occ.d)) {
    throw std::invalid_argument("table shape does not match mdp");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    total += occ.d.data[i] * g.data[i];
  }
  return total;
}

double PolicyValue(const TabularMdp& mdp, const TimedPolicy& policy) {
  return ExpectedSum(mdp, policy,
                     TimedTable::Broadcast(mdp.reward, mdp.horizon));
}

ValueTables QValues(const TabularMdp& mdp, const TimedPolicy& policy,
                    const TimedTable& g) {
  CheckCompatible(mdp, policy);
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  if (g.horizon != T || g.n_states != S || g.n_actions != A) {
    throw std::invalid_argument("table shape does not match mdp");
  }
  ValueTables out{TimedTable(T, S, A, 0.0), TimedStateTable(T, S, 0.0)};
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = g(t, s, a);
        if (t + 1 < T) {
          for (int sp = 0; sp < S; ++sp) q += mdp.P(s, a, sp) * out.v(t + 1, sp);
        }
        out.q(t, s, a) = q;
        v += policy(t, s, a) * q;
      }
      out.v(t, s) = v;
    }
  }
  return out;
}

ValueTables QValues(const TabularMdp& mdp, const TimedPolicy& policy,
                    const StateActionTable& g) {
  return QValues(mdp, policy, TimedTable::Broadcast(g, mdp.horizon));
}

double PolicyValueViaQ(const TabularMdp& mdp, const TimedPolicy& policy) {
  ValueTables vt = QValues(mdp, policy, mdp.reward);
  double j = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) j += mdp.initial_dist[s] * vt.v(0, s);
  return j;
}

std::uint64_t SplitSeed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser applied to a golden-ratio stride.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int SampleIndex(std::mt19937_64& rng, const double* probs, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += probs[i];
  double u = UniformUnit(rng) * total;
  double acc = 0.0;
  int last = 0;
  for (int i = 0; i < n; ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

std::vector<Trajectory> Rollout(const TabularMdp& mdp,
                                const TimedPolicy& policy,
                                std::uint64_t seed, int n) {
  CheckCompatible(mdp, policy);
  if (n < 1) throw std::invalid_argument("rollout: n must be >= 1");
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  std::vector<Trajectory> out(n);
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(SplitSeed(seed, static_cast<std::uint64_t>(i)));
    Trajectory& tr = out[i];
    tr.steps.reserve(T);
    int s = SampleIndex(rng, mdp.initial_dist.data(), S);
    for (int t = 0; t < T; ++t) {
      const double* row = &policy.probs.data[(static_cast<std::size_t>(t) * S +
                                              s) * A];
      int a = SampleIndex(rng, row, A);
      tr.steps.emplace_back(s, a);
      if (t + 1 < T) {
        s = SampleIndex(rng, &mdp.transition[(static_cast<std::size_t>(s) * A +
                                               a) * S],
                        S);
      }
    }
  }
  return out;
}

double PdlResidual(const TabularMdp& mdp, const TimedPolicy& policy_a,
                   const TimedPolicy& policy_b) {
  CheckCompatible(mdp, policy_a);
  CheckCompatible(mdp, policy_b);
  const int S = mdp.n_states, A = mdp.n_actions, T = mdp.horizon;
  const double ja = PolicyValue(mdp, policy_a);
  const double jb = PolicyValue(mdp, policy_b);
  auto expansion = [&](const TimedPolicy& outer, const TimedPolicy& inner) {
    // J(outer) - J(inner) = sum_t E_{s~outer}[E_{a~outer} Q^inner - V^inner].
    ValueTables vt = QValues(mdp, inner, mdp.reward);
    TimedStateTable rho = Occupancy(mdp, outer).StateMarginal();
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        if (rho(t, s) == 0.0) continue;
        double adv = 0.0;
        for (int a = 0; a < A; ++a) adv += outer(t, s, a) * vt.q(t, s, a);
        total += rho(t, s) * (adv - vt.v(t, s));
      }
    }
    return total;
  };
  double r1 = std::abs((ja - jb) - expansion(policy_a, policy_b));
  double r2 = std::abs((jb - ja) - expansion(policy_b, policy_a));
  return std::max(r1, r2);
}

TabularMdp RandomMdp(int n_states, int n_actions, int horizon,
                     std::mt19937_64& rng) {
  TabularMdp mdp(n_states, n_actions, horizon);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (int sp = 0; sp < n_states; ++sp) {
        double w = -std::log(1.0 - UniformUnit(rng));
        mdp.P(s, a, sp) = w;
        total += w;
      }
      for (int sp = 0; sp < n_states; ++sp) mdp.P(s, a, sp) /= total;
      mdp.reward(s, a) = 2.0 * UniformUnit(rng) - 1.0;
    }
  }
  double total = 0.0;
  for (int s = 0; s < n_states; ++s) {
    mdp.initial_dist[s] = -std::log(1.0 - UniformUnit(rng));
    total += mdp.initial_dist[s];
  }
  for (double& p : mdp.initial_dist) p /= total;
  return mdp;
}

TimedPolicy RandomPolicy(int horizon, int n_states, int n_actions,
                         std::mt19937_64& rng) {
  TimedTable p(horizon, n_states, n_actions);
  for (int t = 0; t < horizon; ++t) {
    for (int s = 0; s < n_states; ++s) {
      double total = 0.0;
      for (int a = 0; a < n_actions; ++a) {
        double w = -std::log(1.0 - UniformUnit(rng));
        p(t, s, a) = w;
        total += w;
      }
      for (int a = 0; a < n_actions; ++a) p(t, s, a) /= total;
    }
  }
  return TimedPolicy(std::move(p));
}

double CausalEntropy(const TabularMdp& mdp, const TimedPolicy& policy) {
  TimedStateTable rho = Occupancy(mdp, policy).StateMarginal();
  double h = 0.0;
  for (int t = 0; t < mdp.horizon; ++t) {
    for (int s = 0; s < mdp.n_states; ++s) {
      if (rho(t, s) == 0.0) continue;
      double hs = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        double p = policy(t, s, a);
        if (p > 0.0) hs -= p * std::log(p);
      }
      h += rho(t, s) * hs;
    }
  }
  return h;
}

double ConditionalL1(const TimedPolicy& a, const TimedPolicy& b) {
  if (!a.probs.SameShape(b.probs)) {
    throw std::invalid_argument("policies have different shapes");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.probs.data.size(); ++i) {
    total += std::abs(a.probs.data[i] - b.probs.data[i]);
  }
  return total;
}

}  // namespace mmil
