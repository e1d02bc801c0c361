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

#ifndef MMIL_MOMENTS_H_
#define MMIL_MOMENTS_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmil/mdp.h"

namespace mmil {

enum class ClassKind { kReward, kOffPolicyQ, kOnPolicyQ, kMixed };
enum class PayoffKind { kU1Reward, kU2OffQ, kU3OnQ, kU4Mixed };

std::string ToString(ClassKind kind);
std::string ToString(PayoffKind kind);
ClassKind ParseClassKind(const std::string& name);
PayoffKind ParsePayoffKind(const std::string& name);

inline constexpr int kDefaultRandomAnchors = 8;

// Finite basis of time-indexed state-action functions. Negations are implied:
// vertex 2i is +basis[i] / scale and vertex 2i+1 is -basis[i] / scale.
struct FunctionClass {
  std::string id;
  ClassKind kind = ClassKind::kReward;
  std::vector<TimedTable> basis;
  std::vector<std::string> labels;
  double range_bound = 1.0;
  double scale = 2.0;

  int NumVertices() const { return 2 * static_cast<int>(basis.size()); }
  double VertexSign(int vertex) const { return vertex % 2 == 0 ? 1.0 : -1.0; }
  const TimedTable& VertexBasis(int vertex) const { return basis[vertex / 2]; }
  // The embedded game-class function of one vertex.
  TimedTable Vertex(int vertex) const;
  // Convex combination of vertices.
  TimedTable Combine(const std::vector<double>& weights) const;

  void Validate() const;
};

struct Discriminator {
  std::string class_id;
  std::vector<double> weights;  // one entry per vertex

  static Discriminator Vertex(const FunctionClass& cls, int vertex);
  static Discriminator UniformOver(const FunctionClass& cls);
  int ArgmaxVertex() const;
  void Validate(const FunctionClass& cls) const;
};

struct GameSpec {
  PayoffKind payoff_kind = PayoffKind::kU1Reward;
  TabularMdp mdp;
  TimedPolicy expert;
  FunctionClass function_class;
  double payoff_scale_k = 1.0;
  // Recoverability of the class; only meaningful for the on-policy Q game.
  double recoverability = 0.0;
};

// Builds a game and derives k: 2 * range / scale for U1, U2 and U4 and
// H / scale for U3.
GameSpec MakeGame(PayoffKind kind, const TabularMdp& mdp,
                  const TimedPolicy& expert, const FunctionClass& cls);

// Reward class from stationary tables, each entry within [-1, 1].
FunctionClass RewardClass(const TabularMdp& mdp,
                          const std::vector<StateActionTable>& tables,
                          const std::string& id = "reward");
// The {r, -r} class of the mdp's own reward.
FunctionClass DefaultRewardClass(const TabularMdp& mdp);

// Expert, uniform and n_random seeded random policies.
std::vector<TimedPolicy> DefaultAnchors(const TabularMdp& mdp,
                                        const TimedPolicy& expert,
                                        int n_random, std::uint64_t seed);

FunctionClass InduceQClass(const TabularMdp& mdp,
                           const FunctionClass& reward_basis,
                           const std::vector<TimedPolicy>& anchors);
FunctionClass InduceExpertQClass(const TabularMdp& mdp,
                                 const TimedPolicy& expert,
                                 const FunctionClass& reward_basis);
// Union of the induced Q class and the matching value class, where a value
// element V_t(s) ignores its action argument.
FunctionClass MixedClass(const TabularMdp& mdp,
                         const FunctionClass& reward_basis,
                         const std::vector<TimedPolicy>& anchors);

// max over t, s, a, f of |f(t,s,a) - E_{a'~pi_E} f(t,s,a')| on the raw basis.
double RecoverabilityH(const TimedPolicy& expert, const FunctionClass& cls);

// Weight table W with U(pi, f) = <W, f> / T for a raw function f.
TimedTable PayoffWeights(PayoffKind kind, const TabularMdp& mdp,
                         const TimedPolicy& expert, const TimedPolicy& policy);
// Payoff of a raw (unembedded) function, 1/T normalisation included.
double RawPayoff(PayoffKind kind, const TabularMdp& mdp,
                 const TimedPolicy& expert, const TimedPolicy& policy,
                 const TimedTable& f);
// sup over {+f_i, -f_i} of RawPayoff for a list of raw functions.
double RawSupPayoff(PayoffKind kind, const TabularMdp& mdp,
                    const TimedPolicy& expert, const TimedPolicy& policy,
                    const std::vector<TimedTable>& functions);

std::vector<double> VertexPayoffs(const GameSpec& game,
                                  const TimedPolicy& policy);
double Payoff(const GameSpec& game, const TimedPolicy& policy,
              const Discriminator& disc);

struct BestResponse {
  Discriminator discriminator;
  int vertex = 0;
  double sup_payoff = 0.0;
};

// Exact vertex maximiser, ties broken by lowest vertex index.
BestResponse BestResponseDiscriminator(const GameSpec& game,
                                       const TimedPolicy& policy);

}  // namespace mmil

#endif  // MMIL_MOMENTS_H_
