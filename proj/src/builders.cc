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

#include "mmil/builders.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace mmil {
namespace {

void RequireHorizon(int horizon, int minimum, const char* name) {
  if (horizon < minimum) {
    throw std::invalid_argument(std::string(name) + ": horizon must be >= " +
                                std::to_string(minimum));
  }
}

}  // namespace

BuiltMdp BuildLoop(int horizon) {
  RequireHorizon(horizon, 2, "loop");
  TabularMdp mdp(3, 2, horizon);
  // s0: a1 -> s1, a2 -> s2. s1: a1 -> s2, a2 stays. s2: a1 -> s1, a2 stays.
  mdp.P(0, 0, 1) = 1.0;
  mdp.P(0, 1, 2) = 1.0;
  mdp.P(1, 0, 2) = 1.0;
  mdp.P(1, 1, 1) = 1.0;
  mdp.P(2, 0, 1) = 1.0;
  mdp.P(2, 1, 2) = 1.0;
  mdp.reward(1, 0) = 1.0;
  mdp.reward(1, 1) = 1.0;
  mdp.initial_dist[0] = 1.0;
  mdp.state_labels = {"s0", "s1", "s2"};
  mdp.action_labels = {"a1", "a2"};
  mdp.Validate();
  BuiltMdp out{"loop", mdp,
               TimedPolicy::Deterministic(horizon, 3, 2, {0, 1, 0}), 1.0};
  return out;
}

BuiltMdp BuildCliff(int horizon) {
  RequireHorizon(horizon, 2, "cliff");
  const int chain = horizon;
  const int sx = chain;
  TabularMdp mdp(chain + 1, 2, horizon);
  for (int s = 0; s < chain; ++s) {
    mdp.P(s, 0, std::min(s + 1, chain - 1)) = 1.0;
    mdp.P(s, 1, sx) = 1.0;
    mdp.state_labels.push_back("s" + std::to_string(s));
  }
  mdp.P(sx, 0, sx) = 1.0;
  mdp.P(sx, 1, sx) = 1.0;
  mdp.state_labels.push_back("sx");
  mdp.action_labels = {"a1", "a2"};
  StateActionTable cost = CliffCost(horizon);
  for (int s = 0; s <= chain; ++s) {
    for (int a = 0; a < 2; ++a) mdp.reward(s, a) = -0.5 * cost(s, a);
  }
  mdp.initial_dist[0] = 1.0;
  mdp.Validate();
  std::vector<int> expert(chain + 1, 0);
  return BuiltMdp{"cliff", mdp,
                  TimedPolicy::Deterministic(horizon, chain + 1, 2, expert),
                  0.5};
}

StateActionTable CliffCost(int horizon) {
  StateActionTable cost(horizon + 1, 2, 0.0);
  for (int s = 0; s <= horizon; ++s) {
    for (int a = 0; a < 2; ++a) {
      cost(s, a) = (s == horizon ? 1.0 : 0.0) + (a == 1 ? 1.0 : 0.0);
    }
  }
  return cost;
}

TimedPolicy CliffDropPolicy(int horizon, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("cliff: drop probability outside [0, 1]");
  }
  TimedPolicy pi = BuildCliff(horizon).expert;
  pi(0, 0, 0) = 1.0 - p;
  pi(0, 0, 1) = p;
  return pi;
}

BuiltMdp BuildUnicycle(int horizon) {
  RequireHorizon(horizon, 1, "unicycle");
  TabularMdp mdp(2, 2, horizon);
  mdp.P(0, 0, 0) = 1.0;
  mdp.P(0, 1, 1) = 1.0;
  mdp.P(1, 0, 1) = 1.0;
  mdp.P(1, 1, 1) = 1.0;
  mdp.reward(1, 0) = -1.0;
  mdp.reward(1, 1) = -1.0;
  mdp.initial_dist[0] = 1.0;
  mdp.state_labels = {"s1", "s2"};
  mdp.action_labels = {"a1", "a2"};
  mdp.Validate();
  return BuiltMdp{"unicycle", mdp,
                  TimedPolicy::Deterministic(horizon, 2, 2, {0, 0}), 1.0};
}

TimedPolicy UnicycleFlipPolicy(int horizon, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("unicycle: flip probability outside [0, 1]");
  }
  TimedPolicy pi = TimedPolicy::Deterministic(horizon, 2, 2, {0, 0});
  for (int t = 0; t < horizon; ++t) {
    pi(t, 0, 0) = 1.0 - epsilon;
    pi(t, 0, 1) = epsilon;
  }
  return pi;
}

BuiltMdp BuildTree(int branching, int horizon, long long state_cap,
                   bool reward_on_expert_path) {
  if (branching < 2) throw std::invalid_argument("tree: branching must be >= 2");
  RequireHorizon(horizon, 1, "tree");
  // Nodes at depths 0..horizon, counted with an overflow guard.
  long long count = 0;
  long long level = 1;
  for (int d = 0; d <= horizon; ++d) {
    count += level;
    if (count > state_cap) {
      throw ResourceLimitError("tree: state count exceeds cap of " +
                               std::to_string(state_cap));
    }
    if (d < horizon) level *= branching;
  }
  const int n = static_cast<int>(count);
  const long long first_leaf = count - level;
  TabularMdp mdp(n, branching, horizon);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < branching; ++a) {
      if (s >= first_leaf) {
        mdp.P(s, a, s) = 1.0;
      } else {
        mdp.P(s, a, s * branching + 1 + a) = 1.0;
      }
    }
  }
  if (reward_on_expert_path) {
    int node = 0;
    while (true) {
      for (int a = 0; a < branching; ++a) mdp.reward(node, a) = 1.0;
      if (node >= first_leaf) break;
      node = node * branching + branching;
    }
  }
  mdp.initial_dist[0] = 1.0;
  mdp.Validate();
  std::vector<int> expert(n, branching - 1);
  return BuiltMdp{"tree", mdp,
                  TimedPolicy::Deterministic(horizon, n, branching, expert),
                  1.0};
}

ForestGridSpec DefaultForestSpec() {
  ForestGridSpec spec;
  spec.width = 7;
  spec.length = 12;
  spec.trees = {{4, 3}, {4, 4}, {8, 2}};
  spec.mode_count = 2;
  spec.start_column = 3;
  return spec;
}

ForestGrid BuildForestGrid(const ForestGridSpec& input) {
  ForestGridSpec spec = input;
  if (spec.width < 2 || spec.length < 2) {
    throw std::invalid_argument("forest: grid dimensions must be >= 2");
  }
  if (spec.mode_count != 1 && spec.mode_count != 2) {
    throw std::invalid_argument("forest: mode_count must be 1 or 2");
  }
  if (spec.start_column < 0) spec.start_column = spec.width / 2;
  if (spec.start_column >= spec.width) {
    throw std::invalid_argument("forest: start column outside grid");
  }
  const int W = spec.width, L = spec.length;
  std::set<std::pair<int, int>> trees;
  std::vector<int> per_row(L + 1, 0);
  for (auto [r, c] : spec.trees) {
    if (r < 1 || r >= L || c < 0 || c >= W) {
      throw std::invalid_argument("forest: tree outside rows 1..length-1");
    }
    if (trees.insert({r, c}).second) ++per_row[r];
  }
  for (int r = 0; r <= L; ++r) {
    if (per_row[r] >= W) {
      throw std::invalid_argument("forest: trees cover an entire row");
    }
  }
  auto is_tree = [&](int r, int c) { return trees.count({r, c}) > 0; };

  ForestGrid grid;
  grid.spec = spec;
  grid.lateral = {-1.0, 0.0, 1.0};
  const int grid_states = (L + 1) * W;
  grid.crash_state = grid_states;
  const int S = grid_states + 1;
  TabularMdp mdp(S, 3, L);
  mdp.action_labels = {"left", "straight", "right"};
  for (int r = 0; r <= L; ++r) {
    for (int c = 0; c < W; ++c) {
      mdp.state_labels.push_back("r" + std::to_string(r) + "c" +
                                 std::to_string(c));
    }
  }
  mdp.state_labels.push_back("crash");
  for (int r = 0; r <= L; ++r) {
    for (int c = 0; c < W; ++c) {
      int s = grid.StateIndex(r, c);
      bool terminal = (r == L) || is_tree(r, c);
      for (int a = 0; a < 3; ++a) {
        if (terminal) {
          mdp.P(s, a, s) = 1.0;
          continue;
        }
        int nc = std::clamp(c + a - 1, 0, W - 1);
        int target = is_tree(r + 1, nc) ? grid.crash_state
                                        : grid.StateIndex(r + 1, nc);
        mdp.P(s, a, target) = 1.0;
        mdp.reward(s, a) = 1.0;
      }
    }
  }
  for (int a = 0; a < 3; ++a) mdp.P(grid.crash_state, a, grid.crash_state) = 1.0;
  mdp.initial_dist[grid.StateIndex(0, spec.start_column)] = 1.0;
  if (is_tree(0, spec.start_column)) {
    throw std::invalid_argument("forest: start cell holds a tree");
  }
  mdp.Validate();

  // Expert: swerve around a tree one or two rows ahead, otherwise go straight.
  grid.threat.assign(S, 0);
  TimedTable probs(L, S, 3, 0.0);
  for (int s = 0; s < S; ++s) {
    std::vector<int> moves{1};
    if (s < grid_states) {
      int r = s / W, c = s % W;
      if (r < L && !is_tree(r, c)) {
        bool immediate = is_tree(r + 1, c);
        bool near = !immediate && r + 2 < L && is_tree(r + 2, c);
        if (immediate || near) {
          grid.threat[s] = 1;
          std::vector<int> swerves;
          for (int a : {0, 2}) {
            int nc = c + a - 1;
            if (nc < 0 || nc >= W || is_tree(r + 1, nc)) continue;
            swerves.push_back(a);
          }
          if (!swerves.empty()) {
            if (spec.mode_count == 1) swerves.resize(1);
            moves = swerves;
          }
        }
      }
    }
    for (int t = 0; t < L; ++t) {
      for (int a : moves) probs(t, s, a) = 1.0 / moves.size();
    }
  }
  grid.built = BuiltMdp{"forest", mdp, TimedPolicy(std::move(probs)), 1.0};
  double progress = PolicyValue(grid.built.mdp, grid.built.expert);
  if (std::abs(progress - L) > 1e-9) {
    throw std::invalid_argument("forest: no feasible path for the expert");
  }
  return grid;
}

TimedPolicy MeanActionPolicy(const ForestGrid& grid) {
  const TimedPolicy& expert = grid.built.expert;
  TimedTable probs(expert.horizon(), expert.n_states(), expert.n_actions(), 0.0);
  for (int t = 0; t < expert.horizon(); ++t) {
    for (int s = 0; s < expert.n_states(); ++s) {
      double mean = 0.0;
      for (int a = 0; a < expert.n_actions(); ++a) {
        mean += expert(t, s, a) * grid.lateral[a];
      }
      int best = 0;
      for (int a = 1; a < expert.n_actions(); ++a) {
        if (std::abs(grid.lateral[a] - mean) <
            std::abs(grid.lateral[best] - mean) - 1e-12) {
          best = a;
        }
      }
      probs(t, s, best) = 1.0;
    }
  }
  return TimedPolicy(std::move(probs));
}

}  // namespace mmil
