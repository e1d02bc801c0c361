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

#ifndef MMIL_TABLES_H_
#define MMIL_TABLES_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmil {

// Raised when a construction or search would exceed a configured budget.
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

// Dense row-major table indexed [s][a].
struct StateActionTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> data;

  StateActionTable() = default;
  StateActionTable(int ns, int na, double fill = 0.0)
      : n_states(ns), n_actions(na),
        data(static_cast<std::size_t>(ns) * na, fill) {}

  double& operator()(int s, int a) {
    return data[static_cast<std::size_t>(s) * n_actions + a];
  }
  double operator()(int s, int a) const {
    return data[static_cast<std::size_t>(s) * n_actions + a];
  }
};

// Dense row-major table indexed [t][s][a] with t in [0, horizon).
struct TimedTable {
  int horizon = 0;
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> data;

  TimedTable() = default;
  TimedTable(int t, int ns, int na, double fill = 0.0)
      : horizon(t), n_states(ns), n_actions(na),
        data(static_cast<std::size_t>(t) * ns * na, fill) {}

  double& operator()(int t, int s, int a) {
    return data[(static_cast<std::size_t>(t) * n_states + s) * n_actions + a];
  }
  double operator()(int t, int s, int a) const {
    return data[(static_cast<std::size_t>(t) * n_states + s) * n_actions + a];
  }

  bool SameShape(const TimedTable& other) const {
    return horizon == other.horizon && n_states == other.n_states &&
           n_actions == other.n_actions;
  }

  // Replicates a stationary table across every timestep.
  static TimedTable Broadcast(const StateActionTable& table, int horizon);

  double MaxAbs() const;
  TimedTable Scaled(double factor) const;
};

// Dense table indexed [t][s].
struct TimedStateTable {
  int horizon = 0;
  int n_states = 0;
  std::vector<double> data;

  TimedStateTable() = default;
  TimedStateTable(int t, int ns, double fill = 0.0)
      : horizon(t), n_states(ns),
        data(static_cast<std::size_t>(t) * ns, fill) {}

  double& operator()(int t, int s) {
    return data[static_cast<std::size_t>(t) * n_states + s];
  }
  double operator()(int t, int s) const {
    return data[static_cast<std::size_t>(t) * n_states + s];
  }
};

}  // namespace mmil

#endif  // MMIL_TABLES_H_
