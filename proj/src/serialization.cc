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


#include "mmil/serialization.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mmil {
namespace {

[[noreturn]] void Fail(const std::string& what) {
  throw std::invalid_argument("json: " + what);
}

// Non-finite values have no JSON number form, so they travel as strings.
Json Num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double AsDouble(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  Fail(what + " must be a number");
}

const Json& Field(const Json& j, const std::string& key) {
  if (!j.is_object()) Fail("expected an object holding '" + key + "'");
  auto it = j.find(key);
  if (it == j.end()) Fail("missing field '" + key + "'");
  return *it;
}

double GetDouble(const Json& j, const std::string& key) {
  return AsDouble(Field(j, key), key);
}

int GetInt(const Json& j, const std::string& key) {
  const Json& v = Field(j, key);
  if (!v.is_number_integer()) Fail("'" + key + "' must be an integer");
  return v.get<int>();
}

std::uint64_t GetSeed(const Json& j, const std::string& key) {
  const Json& v = Field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    Fail("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool GetBool(const Json& j, const std::string& key) {
  const Json& v = Field(j, key);
  if (!v.is_boolean()) Fail("'" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string GetString(const Json& j, const std::string& key) {
  const Json& v = Field(j, key);
  if (!v.is_string()) Fail("'" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> GetDoubles(const Json& j, const std::string& what) {
  if (!j.is_array()) Fail(what + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const Json& x : j) out.push_back(AsDouble(x, what));
  return out;
}

Json Doubles(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(Num(x));
  return out;
}

std::vector<std::string> GetLabels(const Json& j, const std::string& key,
                                   int expected) {
  auto it = j.find(key);
  if (it == j.end()) return {};
  if (!it->is_array()) Fail("'" + key + "' must be an array");
  std::vector<std::string> out;
  for (const Json& x : *it) {
    if (!x.is_string()) Fail("'" + key + "' entries must be strings");
    out.push_back(x.get<std::string>());
  }
  if (expected >= 0 && !out.empty() && static_cast<int>(out.size()) != expected) {
    Fail("'" + key + "' has the wrong length");
  }
  return out;
}

void CheckSchema(const Json& j, const char* schema) {
  if (!j.is_object()) Fail(std::string("expected an object for ") + schema);
  auto it = j.find("schema");
  if (it != j.end() && (!it->is_string() || it->get<std::string>() != schema)) {
    Fail(std::string("schema tag mismatch, expected ") + schema);
  }
}

void CheckKeys(const Json& j, std::initializer_list<const char*> allowed,
               const std::string& what) {
  if (!j.is_object()) Fail(what + " must be an object");
  std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) Fail(what + ": unknown key '" + it.key() + "'");
  }
}

// Nested row-major arrays with fixed dimensions.
Json Nest(const double* data, const std::vector<int>& dims, std::size_t level,
          std::size_t stride) {
  Json out = Json::array();
  if (level + 1 == dims.size()) {
    for (int i = 0; i < dims[level]; ++i) out.push_back(Num(data[i]));
    return out;
  }
  const std::size_t inner = stride / dims[level];
  for (int i = 0; i < dims[level]; ++i) {
    out.push_back(Nest(data + i * inner, dims, level + 1, inner));
  }
  return out;
}

Json Nest(const std::vector<double>& data, const std::vector<int>& dims) {
  return Nest(data.data(), dims, 0, data.size());
}

void Unnest(const Json& j, const std::vector<int>& dims, std::size_t level,
            std::vector<double>& out, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dims[level]) {
    Fail(what + " has the wrong shape");
  }
  for (const Json& x : j) {
    if (level + 1 == dims.size()) {
      out.push_back(AsDouble(x, what));
    } else {
      Unnest(x, dims, level + 1, out, what);
    }
  }
}

// Infers the dimensions of a nested array from its first elements.
std::vector<int> Shape(const Json& j, int depth, const std::string& what) {
  std::vector<int> dims;
  const Json* cur = &j;
  for (int d = 0; d < depth; ++d) {
    if (!cur->is_array()) Fail(what + " must be nested " +
                               std::to_string(depth) + " deep");
    dims.push_back(static_cast<int>(cur->size()));
    if (cur->empty()) break;
    cur = &(*cur)[0];
  }
  while (static_cast<int>(dims.size()) < depth) dims.push_back(0);
  return dims;
}

Json TraceToJson(const std::vector<TraceRecord>& trace) {
  Json out = Json::array();
  for (const TraceRecord& r : trace) {
    out.push_back({{"iter", r.iter},
                   {"payoff", Num(r.payoff)},
                   {"sup_payoff", Num(r.sup_payoff)},
                   {"entropy", Num(r.entropy)},
                   {"regret_avg", Num(r.regret_avg)}});
  }
  return out;
}

Json AlgoTraceToJson(const std::vector<AlgoTraceRecord>& trace) {
  Json out = Json::array();
  for (const AlgoTraceRecord& r : trace) {
    out.push_back({{"round", r.round},
                   {"objective", Num(r.objective)},
                   {"exact_gap", Num(r.exact_gap)},
                   {"sup_payoff", Num(r.sup_payoff)}});
  }
  return out;
}

Json NumberMap(const std::map<std::string, double>& m) {
  Json out = Json::object();
  for (const auto& [k, v] : m) out[k] = Num(v);
  return out;
}

std::map<std::string, double> NumberMapFromJson(const Json& j,
                                                const std::string& what) {
  if (!j.is_object()) Fail(what + " must be an object");
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    out[it.key()] = AsDouble(it.value(), what);
  }
  return out;
}

}  // namespace

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Tensors, mdps and policies.

Json ToJson(const TimedTable& table) {
  if (table.data.empty()) return Json::array();
  return Nest(table.data, {table.horizon, table.n_states, table.n_actions});
}

TimedTable TimedTableFromJson(const Json& j) {
  std::vector<int> dims = Shape(j, 3, "table");
  if (dims[0] == 0) return TimedTable();
  if (dims[1] == 0 || dims[2] == 0) Fail("table has an empty dimension");
  TimedTable out;
  out.horizon = dims[0];
  out.n_states = dims[1];
  out.n_actions = dims[2];
  out.data.reserve(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  Unnest(j, dims, 0, out.data, "table");
  return out;
}

Json ToJson(const TabularMdp& mdp) {
  Json j = {{"schema", kMdpSchema},
            {"n_states", mdp.n_states},
            {"n_actions", mdp.n_actions},
            {"horizon", mdp.horizon},
            {"transition",
             Nest(mdp.transition, {mdp.n_states, mdp.n_actions, mdp.n_states})},
            {"reward", Nest(mdp.reward.data, {mdp.n_states, mdp.n_actions})},
            {"initial_dist", Doubles(mdp.initial_dist)}};
  if (!mdp.state_labels.empty()) j["state_labels"] = mdp.state_labels;
  if (!mdp.action_labels.empty()) j["action_labels"] = mdp.action_labels;
  return j;
}

TabularMdp MdpFromJson(const Json& j) {
  CheckSchema(j, kMdpSchema);
  const int ns = GetInt(j, "n_states");
  const int na = GetInt(j, "n_actions");
  const int horizon = GetInt(j, "horizon");
  if (ns <= 0 || na <= 0 || horizon <= 0) {
    Fail("mdp sizes and horizon must be positive");
  }
  TabularMdp mdp(ns, na, horizon);
  mdp.transition.clear();
  Unnest(Field(j, "transition"), {ns, na, ns}, 0, mdp.transition, "transition");
  mdp.reward.data.clear();
  Unnest(Field(j, "reward"), {ns, na}, 0, mdp.reward.data, "reward");
  mdp.initial_dist = GetDoubles(Field(j, "initial_dist"), "initial_dist");
  mdp.state_labels = GetLabels(j, "state_labels", ns);
  mdp.action_labels = GetLabels(j, "action_labels", na);
  mdp.Validate();
  return mdp;
}

Json ToJson(const TimedPolicy& policy) {
  return {{"schema", kPolicySchema},
          {"horizon", policy.horizon()},
          {"n_states", policy.n_states()},
          {"n_actions", policy.n_actions()},
          {"probs", ToJson(policy.probs)}};
}

TimedPolicy PolicyFromJson(const Json& j) {
  CheckSchema(j, kPolicySchema);
  TimedPolicy policy(TimedTableFromJson(Field(j, "probs")));
  if (policy.horizon() != GetInt(j, "horizon") ||
      policy.n_states() != GetInt(j, "n_states") ||
      policy.n_actions() != GetInt(j, "n_actions")) {
    Fail("policy sizes disagree with its probability tensor");
  }
  policy.Validate();
  return policy;
}

Json ToJson(const BuiltMdp& built) {
  return {{"schema", kBuiltMdpSchema},
          {"name", built.name},
          {"reward_scale", Num(built.reward_scale)},
          {"mdp", ToJson(built.mdp)},
          {"expert", ToJson(built.expert)}};
}

BuiltMdp BuiltMdpFromJson(const Json& j) {
  CheckSchema(j, kBuiltMdpSchema);
  BuiltMdp built;
  built.name = GetString(j, "name");
  built.reward_scale = GetDouble(j, "reward_scale");
  built.mdp = MdpFromJson(Field(j, "mdp"));
  built.expert = PolicyFromJson(Field(j, "expert"));
  if (built.expert.horizon() != built.mdp.horizon ||
      built.expert.n_states() != built.mdp.n_states ||
      built.expert.n_actions() != built.mdp.n_actions) {
    Fail("expert policy does not match the mdp");
  }
  return built;
}

// ---------------------------------------------------------------------------
// Moments.

Json ToJson(const FunctionClass& cls) {
  Json basis = Json::array();
  for (const TimedTable& b : cls.basis) basis.push_back(ToJson(b));
  return {{"schema", kFunctionClassSchema},
          {"id", cls.id},
          {"kind", ToString(cls.kind)},
          {"range_bound", Num(cls.range_bound)},
          {"scale", Num(cls.scale)},
          {"labels", cls.labels},
          {"basis", basis}};
}

FunctionClass FunctionClassFromJson(const Json& j) {
  CheckSchema(j, kFunctionClassSchema);
  FunctionClass cls;
  cls.id = GetString(j, "id");
  cls.kind = ParseClassKind(GetString(j, "kind"));
  cls.range_bound = GetDouble(j, "range_bound");
  cls.scale = GetDouble(j, "scale");
  const Json& basis = Field(j, "basis");
  if (!basis.is_array()) Fail("basis must be an array");
  for (const Json& b : basis) cls.basis.push_back(TimedTableFromJson(b));
  cls.labels = GetLabels(j, "labels", static_cast<int>(cls.basis.size()));
  cls.Validate();
  return cls;
}

Json ToJson(const Discriminator& disc) {
  return {{"class_id", disc.class_id}, {"weights", Doubles(disc.weights)}};
}

Discriminator DiscriminatorFromJson(const Json& j) {
  Discriminator disc;
  disc.class_id = GetString(j, "class_id");
  disc.weights = GetDoubles(Field(j, "weights"), "weights");
  return disc;
}

Json ToJson(const GameSpec& game) {
  return {{"schema", kGameSchema},
          {"payoff_kind", ToString(game.payoff_kind)},
          {"payoff_scale_k", Num(game.payoff_scale_k)},
          {"recoverability", Num(game.recoverability)},
          {"mdp", ToJson(game.mdp)},
          {"expert", ToJson(game.expert)},
          {"function_class", ToJson(game.function_class)}};
}

GameSpec GameFromJson(const Json& j) {
  CheckSchema(j, kGameSchema);
  // Rebuilding through MakeGame re-derives k and H from the stored class so
  // a hand-edited document cannot carry inconsistent constants.
  GameSpec game = MakeGame(ParsePayoffKind(GetString(j, "payoff_kind")),
                           MdpFromJson(Field(j, "mdp")),
                           PolicyFromJson(Field(j, "expert")),
                           FunctionClassFromJson(Field(j, "function_class")));
  return game;
}

// ---------------------------------------------------------------------------
// Data.

Json ToJson(const std::vector<Trajectory>& trajectories) {
  Json out = Json::array();
  for (const Trajectory& tr : trajectories) {
    Json steps = Json::array();
    for (auto [s, a] : tr.steps) steps.push_back(Json::array({s, a}));
    out.push_back(steps);
  }
  return out;
}

std::vector<Trajectory> TrajectoriesFromJson(const Json& j) {
  if (!j.is_array()) Fail("trajectories must be an array");
  std::vector<Trajectory> out;
  for (const Json& steps : j) {
    if (!steps.is_array()) Fail("a trajectory must be an array of steps");
    Trajectory tr;
    for (const Json& step : steps) {
      if (!step.is_array() || step.size() != 2 || !step[0].is_number_integer() ||
          !step[1].is_number_integer()) {
        Fail("a step must be a [state, action] integer pair");
      }
      tr.steps.emplace_back(step[0].get<int>(), step[1].get<int>());
    }
    out.push_back(std::move(tr));
  }
  return out;
}

Json ToJson(const ExpertDataset& data) {
  Json j = {{"schema", kDatasetSchema},
            {"mdp", ToJson(data.mdp)},
            {"trajectories", ToJson(data.trajectories)}};
  if (data.generator) j["generator"] = ToJson(*data.generator);
  return j;
}

ExpertDataset DatasetFromJson(const Json& j) {
  CheckSchema(j, kDatasetSchema);
  ExpertDataset data;
  data.mdp = MdpFromJson(Field(j, "mdp"));
  data.trajectories = TrajectoriesFromJson(Field(j, "trajectories"));
  if (j.contains("generator")) data.generator = PolicyFromJson(j["generator"]);
  data.Validate();
  return data;
}

// ---------------------------------------------------------------------------
// Results.

Json ToJson(const EquilibriumResult& r) {
  return {{"schema", kEquilibriumSchema},
          {"policy", ToJson(r.policy)},
          {"discriminator", ToJson(r.discriminator)},
          {"certified_sup", Num(r.certified_sup)},
          {"threshold", Num(r.threshold)},
          {"certified", r.certified},
          {"iterations", r.iterations},
          {"alpha", Num(r.alpha)},
          {"delta_prime", Num(r.delta_prime)},
          {"q_m", Num(r.q_m)},
          {"hedge_rate", Num(r.hedge_rate)},
          {"hedge_bound", Num(r.hedge_bound)},
          {"f_regret_avg", Num(r.f_regret_avg)},
          {"trace", TraceToJson(r.trace)}};
}

EquilibriumResult EquilibriumResultFromJson(const Json& j) {
  CheckSchema(j, kEquilibriumSchema);
  EquilibriumResult r;
  r.policy = PolicyFromJson(Field(j, "policy"));
  r.discriminator = DiscriminatorFromJson(Field(j, "discriminator"));
  r.certified_sup = GetDouble(j, "certified_sup");
  r.threshold = GetDouble(j, "threshold");
  r.certified = GetBool(j, "certified");
  r.iterations = GetInt(j, "iterations");
  r.alpha = GetDouble(j, "alpha");
  r.delta_prime = GetDouble(j, "delta_prime");
  r.q_m = GetDouble(j, "q_m");
  r.hedge_rate = GetDouble(j, "hedge_rate");
  r.hedge_bound = GetDouble(j, "hedge_bound");
  r.f_regret_avg = GetDouble(j, "f_regret_avg");
  for (const Json& t : Field(j, "trace")) {
    TraceRecord rec;
    rec.iter = GetInt(t, "iter");
    rec.payoff = GetDouble(t, "payoff");
    rec.sup_payoff = GetDouble(t, "sup_payoff");
    rec.entropy = GetDouble(t, "entropy");
    rec.regret_avg = GetDouble(t, "regret_avg");
    r.trace.push_back(rec);
  }
  return r;
}

Json ToJson(const EquilibriumCertificate& c) {
  return {{"sup_payoff", Num(c.sup_payoff)},
          {"payoff", Num(c.payoff)},
          {"inf_payoff", Num(c.inf_payoff)},
          {"policy_side_slack", Num(c.policy_side_slack)},
          {"discriminator_side_slack", Num(c.discriminator_side_slack)},
          {"holds", c.holds},
          {"inf_is_approximate", c.inf_is_approximate}};
}

Json ToJson(const TrainResult& r) {
  return {{"schema", kTrainSchema},
          {"policy", ToJson(r.policy)},
          {"rounds", r.rounds},
          {"converged", r.converged},
          {"collapse_detected", r.collapse_detected},
          {"trace", AlgoTraceToJson(r.trace)}};
}

TrainResult TrainResultFromJson(const Json& j) {
  CheckSchema(j, kTrainSchema);
  TrainResult r;
  r.policy = PolicyFromJson(Field(j, "policy"));
  r.rounds = GetInt(j, "rounds");
  r.converged = GetBool(j, "converged");
  r.collapse_detected = GetBool(j, "collapse_detected");
  for (const Json& t : Field(j, "trace")) {
    AlgoTraceRecord rec;
    rec.round = GetInt(t, "round");
    rec.objective = GetDouble(t, "objective");
    rec.exact_gap = GetDouble(t, "exact_gap");
    rec.sup_payoff = GetDouble(t, "sup_payoff");
    r.trace.push_back(rec);
  }
  return r;
}

Json ToJson(const BoundReport& r) {
  return {{"experiment", ToString(r.experiment)},
          {"instance", r.instance},
          {"parameters", NumberMap(r.parameters)},
          {"measured_gap", Num(r.measured_gap)},
          {"bound_value", Num(r.bound_value)},
          {"satisfied", r.satisfied},
          {"extras", NumberMap(r.extras)},
          {"note", r.note}};
}

BoundReport BoundReportFromJson(const Json& j) {
  BoundReport r;
  r.experiment = ParseExperiment(GetString(j, "experiment"));
  r.instance = GetString(j, "instance");
  r.parameters = NumberMapFromJson(Field(j, "parameters"), "parameters");
  r.measured_gap = GetDouble(j, "measured_gap");
  r.bound_value = GetDouble(j, "bound_value");
  r.satisfied = GetBool(j, "satisfied");
  r.extras = NumberMapFromJson(Field(j, "extras"), "extras");
  r.note = GetString(j, "note");
  return r;
}

Json ToJson(const std::vector<BoundReport>& reports) {
  Json arr = Json::array();
  for (const BoundReport& r : reports) arr.push_back(ToJson(r));
  return {{"schema", kBoundsSchema}, {"reports", std::move(arr)}};
}

std::vector<BoundReport> BoundReportsFromJson(const Json& j) {
  CheckSchema(j, kBoundsSchema);
  const Json& arr = Field(j, "reports");
  if (!arr.is_array()) Fail("bound reports must be an array");
  std::vector<BoundReport> out;
  for (const Json& r : arr) out.push_back(BoundReportFromJson(r));
  return out;
}

// ---------------------------------------------------------------------------
// Configs.

Json ToJson(const SolverConfig& c) {
  return {{"mode", ToString(c.mode)},
          {"target_delta", Num(c.target_delta)},
          {"max_outer_iters", c.max_outer_iters},
          {"alpha", Num(c.alpha)},
          {"hedge_rate", Num(c.hedge_rate)},
          {"pmd_rate", Num(c.pmd_rate)},
          {"seed", c.seed},
          {"stop_when_certified", c.stop_when_certified}};
}

SolverConfig SolverConfigFromJson(const Json& j) {
  CheckKeys(j, {"mode", "target_delta", "max_outer_iters", "alpha",
                "hedge_rate", "pmd_rate", "seed", "stop_when_certified"},
            "solver config");
  SolverConfig c;
  if (j.contains("mode")) c.mode = ParseSolverMode(GetString(j, "mode"));
  if (j.contains("target_delta")) c.target_delta = GetDouble(j, "target_delta");
  if (j.contains("max_outer_iters")) {
    c.max_outer_iters = GetInt(j, "max_outer_iters");
  }
  if (j.contains("alpha")) c.alpha = GetDouble(j, "alpha");
  if (j.contains("hedge_rate")) c.hedge_rate = GetDouble(j, "hedge_rate");
  if (j.contains("pmd_rate")) c.pmd_rate = GetDouble(j, "pmd_rate");
  if (j.contains("seed")) c.seed = GetSeed(j, "seed");
  if (j.contains("stop_when_certified")) {
    c.stop_when_certified = GetBool(j, "stop_when_certified");
  }
  c.Validate();
  return c;
}

Json ToJson(const BcConfig& c) {
  return {{"loss", ToString(c.loss)},
          {"action_embedding", Doubles(c.action_embedding)}};
}

BcConfig BcConfigFromJson(const Json& j) {
  CheckKeys(j, {"loss", "action_embedding"}, "bc config");
  BcConfig c;
  if (j.contains("loss")) c.loss = ParseBcLoss(GetString(j, "loss"));
  if (j.contains("action_embedding")) {
    c.action_embedding = GetDoubles(j["action_embedding"], "action_embedding");
  }
  return c;
}

Json ToJson(const AdvilConfig& c) {
  return {{"eta_f", Num(c.eta_f)},
          {"eta_pi", Num(c.eta_pi)},
          {"delta", Num(c.delta)},
          {"max_steps", c.max_steps},
          {"exact_inner", c.exact_inner},
          {"init_from_data", c.init_from_data},
          {"collapse_window", c.collapse_window},
          {"collapse_factor", Num(c.collapse_factor)}};
}

AdvilConfig AdvilConfigFromJson(const Json& j) {
  CheckKeys(j, {"eta_f", "eta_pi", "delta", "max_steps", "exact_inner",
                "init_from_data", "collapse_window", "collapse_factor"},
            "advil config");
  AdvilConfig c;
  if (j.contains("eta_f")) c.eta_f = GetDouble(j, "eta_f");
  if (j.contains("eta_pi")) c.eta_pi = GetDouble(j, "eta_pi");
  if (j.contains("delta")) c.delta = GetDouble(j, "delta");
  if (j.contains("max_steps")) c.max_steps = GetInt(j, "max_steps");
  if (j.contains("exact_inner")) c.exact_inner = GetBool(j, "exact_inner");
  if (j.contains("init_from_data")) {
    c.init_from_data = GetBool(j, "init_from_data");
  }
  if (j.contains("collapse_window")) {
    c.collapse_window = GetInt(j, "collapse_window");
  }
  if (j.contains("collapse_factor")) {
    c.collapse_factor = GetDouble(j, "collapse_factor");
  }
  c.Validate();
  return c;
}

Json ToJson(const AdrilConfig& c) {
  return {{"f_update_freq", c.f_update_freq},
          {"alpha", Num(c.alpha)},
          {"delta", Num(c.delta)},
          {"max_rounds", c.max_rounds},
          {"rollouts_per_round", c.rollouts_per_round},
          {"balanced_sampling", c.balanced_sampling},
          {"stationary_kernel", c.stationary_kernel},
          {"seed", c.seed}};
}

AdrilConfig AdrilConfigFromJson(const Json& j) {
  CheckKeys(j, {"f_update_freq", "alpha", "delta", "max_rounds",
                "rollouts_per_round", "balanced_sampling",
                "stationary_kernel", "seed"},
            "adril config");
  AdrilConfig c;
  if (j.contains("f_update_freq")) c.f_update_freq = GetInt(j, "f_update_freq");
  if (j.contains("alpha")) c.alpha = GetDouble(j, "alpha");
  if (j.contains("delta")) c.delta = GetDouble(j, "delta");
  if (j.contains("max_rounds")) c.max_rounds = GetInt(j, "max_rounds");
  if (j.contains("rollouts_per_round")) {
    c.rollouts_per_round = GetInt(j, "rollouts_per_round");
  }
  if (j.contains("balanced_sampling")) {
    c.balanced_sampling = GetBool(j, "balanced_sampling");
  }
  if (j.contains("stationary_kernel")) {
    c.stationary_kernel = GetBool(j, "stationary_kernel");
  }
  if (j.contains("seed")) c.seed = GetSeed(j, "seed");
  c.Validate();
  return c;
}

Json ToJson(const DaequilConfig& c) {
  return {{"delta", Num(c.delta)},
          {"max_rounds", c.max_rounds},
          {"bc_weight", Num(c.bc_weight)},
          {"reg_weight", Num(c.reg_weight)},
          {"rollouts_per_round", c.rollouts_per_round},
          {"max_gd_iters", c.max_gd_iters},
          {"gd_tolerance", Num(c.gd_tolerance)},
          {"seed", c.seed}};
}

DaequilConfig DaequilConfigFromJson(const Json& j) {
  CheckKeys(j, {"delta", "max_rounds", "bc_weight", "reg_weight",
                "rollouts_per_round", "max_gd_iters", "gd_tolerance", "seed"},
            "daequil config");
  DaequilConfig c;
  if (j.contains("delta")) c.delta = GetDouble(j, "delta");
  if (j.contains("max_rounds")) c.max_rounds = GetInt(j, "max_rounds");
  if (j.contains("bc_weight")) c.bc_weight = GetDouble(j, "bc_weight");
  if (j.contains("reg_weight")) c.reg_weight = GetDouble(j, "reg_weight");
  if (j.contains("rollouts_per_round")) {
    c.rollouts_per_round = GetInt(j, "rollouts_per_round");
  }
  if (j.contains("max_gd_iters")) c.max_gd_iters = GetInt(j, "max_gd_iters");
  if (j.contains("gd_tolerance")) c.gd_tolerance = GetDouble(j, "gd_tolerance");
  if (j.contains("seed")) c.seed = GetSeed(j, "seed");
  c.Validate();
  return c;
}

Json ToJson(const DaggerConfig& c) {
  return {{"rounds", c.rounds},
          {"rollouts_per_round", c.rollouts_per_round},
          {"bc", ToJson(c.bc)},
          {"seed", c.seed}};
}

DaggerConfig DaggerConfigFromJson(const Json& j) {
  CheckKeys(j, {"rounds", "rollouts_per_round", "bc", "seed"},
            "dagger config");
  DaggerConfig c;
  if (j.contains("rounds")) c.rounds = GetInt(j, "rounds");
  if (j.contains("rollouts_per_round")) {
    c.rollouts_per_round = GetInt(j, "rollouts_per_round");
  }
  if (j.contains("bc")) c.bc = BcConfigFromJson(j["bc"]);
  if (j.contains("seed")) c.seed = GetSeed(j, "seed");
  c.Validate();
  return c;
}

// ---------------------------------------------------------------------------
// Text.

std::string SolveTraceCsv(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  out << "iter,payoff,sup_payoff,entropy,regret_avg\n";
  for (const TraceRecord& r : trace) {
    out << r.iter << ',' << FormatDouble(r.payoff) << ','
        << FormatDouble(r.sup_payoff) << ',' << FormatDouble(r.entropy) << ','
        << FormatDouble(r.regret_avg) << '\n';
  }
  return out.str();
}

std::string AlgoTraceCsv(const std::vector<AlgoTraceRecord>& trace) {
  std::ostringstream out;
  out << "round,objective,exact_gap,sup_payoff\n";
  for (const AlgoTraceRecord& r : trace) {
    out << r.round << ',' << FormatDouble(r.objective) << ','
        << FormatDouble(r.exact_gap) << ',' << FormatDouble(r.sup_payoff)
        << '\n';
  }
  return out.str();
}

std::string DumpJson(const Json& j) { return j.dump(2) + "\n"; }

Json ParseJsonText(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    Fail(std::string("parse error: ") + e.what());
  }
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseJsonText(buf.str());
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace mmil
