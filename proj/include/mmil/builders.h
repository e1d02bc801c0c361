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

#ifndef MMIL_BUILDERS_H_
#define MMIL_BUILDERS_H_

#include <string>
#include <utility>
#include <vector>

#include "mmil/mdp.h"

namespace mmil {

// An example MDP with its expert. Stored rewards equal reward_scale times the
// reward used in the textbook arithmetic, so unscaled gaps are gap/scale.
struct BuiltMdp {
  std::string name;
  TabularMdp mdp;
  TimedPolicy expert;
  double reward_scale = 1.0;
};

// Three states: s0 start, s1 rewarding, s2 where no expert data ever lands.
BuiltMdp BuildLoop(int horizon);

// Chain s0..s_{T-1} plus an absorbing s_x. Stored reward is
// (-1[s = s_x] - 1[a = a2]) / 2.
BuiltMdp BuildCliff(int horizon);
// The unscaled two-indicator cost 1[s = s_x] + 1[a = a2] for Cliff.
StateActionTable CliffCost(int horizon);
// Policy equal to the expert except that it takes a2 with probability p in
// s0 at the first step.
TimedPolicy CliffDropPolicy(int horizon, double p);

// Two states: s1 (a1 stays, a2 leaves) and an absorbing s2 costing 1 per step.
BuiltMdp BuildUnicycle(int horizon);
// Takes a2 in s1 with probability epsilon at every step.
TimedPolicy UnicycleFlipPolicy(int horizon, double epsilon);

inline constexpr long long kDefaultStateCap = 1000000;

// Complete branching-ary tree. With reward_on_expert_path the nodes on the
// right-most path pay 1, otherwise every reward is 0.
BuiltMdp BuildTree(int branching, int horizon,
                   long long state_cap = kDefaultStateCap,
                   bool reward_on_expert_path = true);

struct ForestGridSpec {
  int width = 7;
  int length = 12;
  std::vector<std::pair<int, int>> trees;  // (row, column)
  int mode_count = 2;
  int start_column = -1;  // -1 selects the centre column
};

// Gridworld where every step advances one row. Actions shift the column by
// -1, 0, +1. Entering a tree cell ends in an absorbing crash state.
struct ForestGrid {
  BuiltMdp built;
  ForestGridSpec spec;
  std::vector<double> lateral;  // lateral displacement per action
  std::vector<int> threat;      // 1 where a tree lies one or two rows ahead
  int crash_state = 0;

  int StateIndex(int row, int column) const {
    return row * spec.width + column;
  }
};

ForestGrid BuildForestGrid(const ForestGridSpec& spec);
// Layout used by the ordering experiment: a two-cell cluster that can only be
// passed on the left at the last moment, then a lone tree.
ForestGridSpec DefaultForestSpec();
// Deterministic policy that plays the action nearest to the expert's mean
// lateral displacement in every state.
TimedPolicy MeanActionPolicy(const ForestGrid& grid);

}  // namespace mmil

#endif  // MMIL_BUILDERS_H_
