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

#include "mmil/moments.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mmil {

std::string ToString(ClassKind kind) {
  switch (kind) {
    case ClassKind::kReward: return "reward";
    case ClassKind::kOffPolicyQ: return "off_policy_q";
    case ClassKind::kOnPolicyQ: return "on_policy_q";
    case ClassKind::kMixed: return "mixed";
  }
  return "unknown";
}

std::string ToString(PayoffKind kind) {
  switch (kind) {
    case PayoffKind::kU1Reward: return "u1";
    case PayoffKind::kU2OffQ: return "u2";
    case PayoffKind::kU3OnQ: return "u3";
    case PayoffKind::kU4Mixed: return "u4";
  }
  return "unknown";
}

ClassKind ParseClassKind(const std::string& name) {
  if (name == "reward") return ClassKind::kReward;
  if (name == "off_policy_q") return ClassKind::kOffPolicyQ;
  if (name == "on_policy_q") return ClassKind::kOnPolicyQ;
  if (name == "mixed") return ClassKind::kMixed;
  throw std::invalid_argument("unknown class kind: " + name);
}

PayoffKind ParsePayoffKind(const std::string& name) {
  if (name == "u1") return PayoffKind::kU1Reward;
  if (name == "u2") return PayoffKind::kU2OffQ;
  if (name == "u3") return PayoffKind::kU3OnQ;
  if (name == "u4") return PayoffKind::kU4Mixed;
  throw std::invalid_argument("unknown payoff kind: " + name);
}

TimedTable FunctionClass::Vertex(int vertex) const {
  if (vertex < 0 || vertex >= NumVertices()) {
    throw std::invalid_argument("vertex index out of range");
  }
  return VertexBasis(vertex).Scaled(VertexSign(vertex) / scale);
}

TimedTable FunctionClass::Combine(const std::vector<double>& weights) const {
  if (static_cast<int>(weights.size()) != NumVertices()) {
    throw std::invalid_argument("weight vector does not match class");
  }
  const TimedTable& first = basis.front();
  TimedTable out(first.horizon, first.n_states, first.n_actions, 0.0);
  for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
    double c = (weights[2 * i] - weights[2 * i + 1]) / scale;
    if (c == 0.0) continue;
    for (std::size_t j = 0; j < out.data.size(); ++j) {
      out.data[j] += c * basis[i].data[j];
    }
  }
  return out;
}

void FunctionClass::Validate() const {
  if (basis.empty()) throw std::invalid_argument("class: empty basis");
  if (!(scale > 0.0)) throw std::invalid_argument("class: scale must be > 0");
  for (const TimedTable& f : basis) {
    if (!f.SameShape(basis.front())) {
      throw std::invalid_argument("class: basis shapes differ");
    }
    if (f.MaxAbs() > range_bound + 1e-9) {
      throw std::invalid_argument("class: basis entry exceeds range bound");
    }
  }
  if (!labels.empty() && labels.size() != basis.size()) {
    throw std::invalid_argument("class: label count mismatch");
  }
}

Discriminator Discriminator::Vertex(const FunctionClass& cls, int vertex) {
  Discriminator d{cls.id, std::vector<double>(cls.NumVertices(), 0.0)};
  d.weights.at(vertex) = 1.0;
  return d;
}

Discriminator Discriminator::UniformOver(const FunctionClass& cls) {
  return Discriminator{
      cls.id, std::vector<double>(cls.NumVertices(), 1.0 / cls.NumVertices())};
}

int Discriminator::ArgmaxVertex() const {
  return static_cast<int>(std::max_element(weights.begin(), weights.end()) -
                          weights.begin());
}

void Discriminator::Validate(const FunctionClass& cls) const {
  if (class_id != cls.id) {
    throw std::invalid_argument("discriminator belongs to class '" + class_id +
                                "', not '" + cls.id + "'");
  }
  if (static_cast<int>(weights.size()) != cls.NumVertices()) {
    throw std::invalid_argument("discriminator has wrong number of weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("discriminator weights do not sum to 1");
  }
}

GameSpec MakeGame(PayoffKind kind, const TabularMdp& mdp,
                  const TimedPolicy& expert, const FunctionClass& cls) {
  mdp.Validate();
  expert.Validate();
  CheckCompatible(mdp, expert);
  cls.Validate();
  const TimedTable& f0 = cls.basis.front();
  if (f0.horizon != mdp.horizon || f0.n_states != mdp.n_states ||
      f0.n_actions != mdp.n_actions) {
    throw std::invalid_argument("class shape does not match mdp");
  }
  ClassKind expected = ClassKind::kReward;
  switch (kind) {
    case PayoffKind::kU1Reward: expected = ClassKind::kReward; break;
    case PayoffKind::kU2OffQ: expected = ClassKind::kOffPolicyQ; break;
    case PayoffKind::kU3OnQ: expected = ClassKind::kOnPolicyQ; break;
    case PayoffKind::kU4Mixed: expected = ClassKind::kMixed; break;
  }
  if (cls.kind != expected) {
    throw std::invalid_argument("payoff " + ToString(kind) +
                                " requires a class of kind " +
                                ToString(expected) + ", got " +
                                ToString(cls.kind));
  }
  GameSpec game{kind, mdp, expert, cls, 1.0, 0.0};
  if (kind == PayoffKind::kU3OnQ) {
    game.recoverability = RecoverabilityH(expert, cls);
    game.payoff_scale_k = game.recoverability / cls.scale;
  } else {
    game.payoff_scale_k = 2.0 * cls.range_bound / cls.scale;
  }
  return game;
}

FunctionClass RewardClass(const TabularMdp& mdp,
                          const std::vector<StateActionTable>& tables,
                          const std::string& id) {
  if (tables.empty()) throw std::invalid_argument("reward class: no tables");
  FunctionClass cls;
  cls.id = id;
  cls.kind = ClassKind::kReward;
  cls.scale = 2.0;
  cls.range_bound = 0.0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].n_states != mdp.n_states ||
        tables[i].n_actions != mdp.n_actions) {
      throw std::invalid_argument("reward class: table shape mismatch");
    }
    cls.basis.push_back(TimedTable::Broadcast(tables[i], mdp.horizon));
    cls.labels.push_back("g" + std::to_string(i));
  }
  cls.range_bound = 1.0;
  for (const TimedTable& f : cls.basis) {
    if (f.MaxAbs() > 1.0 + 1e-12) {
      throw std::invalid_argument("reward class: entries must lie in [-1, 1]");
    }
  }
  return cls;
}

FunctionClass DefaultRewardClass(const TabularMdp& mdp) {
  FunctionClass cls = RewardClass(mdp, {mdp.reward}, "reward");
  cls.labels = {"r"};
  return cls;
}

std::vector<TimedPolicy> DefaultAnchors(const TabularMdp& mdp,
                                        const TimedPolicy& expert,
                                        int n_random, std::uint64_t seed) {
  if (n_random < 0) throw std::invalid_argument("anchors: n_random < 0");
  std::vector<TimedPolicy> anchors{
      expert, TimedPolicy::Uniform(mdp.horizon, mdp.n_states, mdp.n_actions)};
  for (int i = 0; i < n_random; ++i) {
    std::mt19937_64 rng(SplitSeed(seed, static_cast<std::uint64_t>(i)));
    anchors.push_back(
        RandomPolicy(mdp.horizon, mdp.n_states, mdp.n_actions, rng));
  }
  return anchors;
}

FunctionClass InduceQClass(const TabularMdp& mdp,
                           const FunctionClass& reward_basis,
                           const std::vector<TimedPolicy>& anchors) {
  if (reward_basis.kind != ClassKind::kReward) {
    throw std::invalid_argument("induce_q_class: basis must be a reward class");
  }
  if (anchors.empty()) {
    throw std::invalid_argument("induce_q_class: empty anchor set");
  }
  FunctionClass cls;
  cls.id = "q_" + reward_basis.id;
  cls.kind = ClassKind::kOffPolicyQ;
  cls.range_bound = mdp.horizon;
  cls.scale = 2.0 * mdp.horizon;
  for (std::size_t p = 0; p < anchors.size(); ++p) {
    for (std::size_t g = 0; g < reward_basis.basis.size(); ++g) {
      cls.basis.push_back(QValues(mdp, anchors[p], reward_basis.basis[g]).q);
      cls.labels.push_back("Q[pi" + std::to_string(p) + "," +
                           (reward_basis.labels.empty()
                                ? "g" + std::to_string(g)
                                : reward_basis.labels[g]) +
                           "]");
    }
  }
  cls.Validate();
  return cls;
}

FunctionClass InduceExpertQClass(const TabularMdp& mdp,
                                 const TimedPolicy& expert,
                                 const FunctionClass& reward_basis) {
  FunctionClass cls = InduceQClass(mdp, reward_basis, {expert});
  cls.id = "qe_" + reward_basis.id;
  cls.kind = ClassKind::kOnPolicyQ;
  double qbar = 0.0;
  for (const TimedTable& f : cls.basis) qbar = std::max(qbar, f.MaxAbs());
  cls.range_bound = qbar;
  for (std::string& label : cls.labels) label[0] = 'E';
  return cls;
}

FunctionClass MixedClass(const TabularMdp& mdp,
                         const FunctionClass& reward_basis,
                         const std::vector<TimedPolicy>& anchors) {
  FunctionClass q = InduceQClass(mdp, reward_basis, anchors);
  FunctionClass cls = q;
  cls.id = "mixed_" + reward_basis.id;
  cls.kind = ClassKind::kMixed;
  std::size_t n_q = q.basis.size();
  std::size_t g_count = reward_basis.basis.size();
  for (std::size_t i = 0; i < n_q; ++i) {
    const TimedPolicy& pi = anchors[i / g_count];
    const TimedTable& qt = q.basis[i];
    TimedTable v(qt.horizon, qt.n_states, qt.n_actions, 0.0);
    for (int t = 0; t < qt.horizon; ++t) {
      for (int s = 0; s < qt.n_states; ++s) {
        double value = 0.0;
        for (int a = 0; a < qt.n_actions; ++a) value += pi(t, s, a) * qt(t, s, a);
        for (int a = 0; a < qt.n_actions; ++a) v(t, s, a) = value;
      }
    }
    cls.basis.push_back(std::move(v));
    cls.labels.push_back("V" + q.labels[i].substr(1));
  }
  cls.Validate();
  return cls;
}

double RecoverabilityH(const TimedPolicy& expert, const FunctionClass& cls) {
  double h = 0.0;
  for (const TimedTable& f : cls.basis) {
    if (!f.SameShape(expert.probs)) {
      throw std::invalid_argument("recoverability: shape mismatch");
    }
    for (int t = 0; t < f.horizon; ++t) {
      for (int s = 0; s < f.n_states; ++s) {
        double mean = 0.0;
        for (int a = 0; a < f.n_actions; ++a) mean += expert(t, s, a) * f(t, s, a);
        for (int a = 0; a < f.n_actions; ++a) {
          h = std::max(h, std::abs(f(t, s, a) - mean));
        }
      }
    }
  }
  return h;
}

TimedTable PayoffWeights(PayoffKind kind, const TabularMdp& mdp,
                         const TimedPolicy& expert, const TimedPolicy& policy) {
  CheckCompatible(mdp, policy);
  CheckCompatible(mdp, expert);
  const int T = mdp.horizon, S = mdp.n_states, A = mdp.n_actions;
  TimedTable w(T, S, A, 0.0);
  if (kind == PayoffKind::kU1Reward || kind == PayoffKind::kU4Mixed) {
    OccupancyMeasure dp = Occupancy(mdp, policy);
    OccupancyMeasure de = Occupancy(mdp, expert);
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      w.data[i] = dp.d.data[i] - de.d.data[i];
    }
    return w;
  }
  // U2 weighs action differences by expert states, U3 by learner states.
  TimedStateTable rho = kind == PayoffKind::kU2OffQ
                            ? Occupancy(mdp, expert).StateMarginal()
                            : Occupancy(mdp, policy).StateMarginal();
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      if (rho(t, s) == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        w(t, s, a) = rho(t, s) * (policy(t, s, a) - expert(t, s, a));
      }
    }
  }
  return w;
}

namespace {

double Dot(const TimedTable& a, const TimedTable& b) {
  if (!a.SameShape(b)) throw std::invalid_argument("table shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) total += a.data[i] * b.data[i];
  return total;
}

}  // namespace

double RawPayoff(PayoffKind kind, const TabularMdp& mdp,
                 const TimedPolicy& expert, const TimedPolicy& policy,
                 const TimedTable& f) {
  return Dot(PayoffWeights(kind, mdp, expert, policy), f) / mdp.horizon;
}

double RawSupPayoff(PayoffKind kind, const TabularMdp& mdp,
                    const TimedPolicy& expert, const TimedPolicy& policy,
                    const std::vector<TimedTable>& functions) {
  TimedTable w = PayoffWeights(kind, mdp, expert, policy);
  double best = 0.0;
  for (const TimedTable& f : functions) {
    best = std::max(best, std::abs(Dot(w, f)) / mdp.horizon);
  }
  return best;
}

std::vector<double> VertexPayoffs(const GameSpec& game,
                                  const TimedPolicy& policy) {
  TimedTable w = PayoffWeights(game.payoff_kind, game.mdp, game.expert, policy);
  const FunctionClass& cls = game.function_class;
  std::vector<double> out(cls.NumVertices());
  for (std::size_t i = 0; i < cls.basis.size(); ++i) {
    double v = Dot(w, cls.basis[i]) / (game.mdp.horizon * cls.scale);
    out[2 * i] = v;
    out[2 * i + 1] = -v;
  }
  return out;
}

double Payoff(const GameSpec& game, const TimedPolicy& policy,
              const Discriminator& disc) {
  disc.Validate(game.function_class);
  std::vector<double> vp = VertexPayoffs(game, policy);
  double total = 0.0;
  for (std::size_t i = 0; i < vp.size(); ++i) total += disc.weights[i] * vp[i];
  return total;
}

BestResponse BestResponseDiscriminator(const GameSpec& game,
                                       const TimedPolicy& policy) {
  std::vector<double> vp = VertexPayoffs(game, policy);
  int best = 0;
  for (int i = 1; i < static_cast<int>(vp.size()); ++i) {
    if (vp[i] > vp[best]) best = i;
  }
  return BestResponse{Discriminator::Vertex(game.function_class, best), best,
                      vp[best]};
}

}  // namespace mmil
