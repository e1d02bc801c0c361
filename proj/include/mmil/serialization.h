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


#ifndef MMIL_SERIALIZATION_H_
#define MMIL_SERIALIZATION_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "mmil/algorithms.h"
#include "mmil/bounds.h"
#include "mmil/builders.h"
#include "mmil/equilibrium.h"
#include "mmil/mdp.h"
#include "mmil/moments.h"

namespace mmil {

using Json = nlohmann::json;

// Document tags written into the "schema" field of every top-level artifact.
// Readers accept documents without the tag.
inline constexpr char kMdpSchema[] = "mmil/mdp/v1";
inline constexpr char kPolicySchema[] = "mmil/policy/v1";
inline constexpr char kBuiltMdpSchema[] = "mmil/built_mdp/v1";
inline constexpr char kFunctionClassSchema[] = "mmil/function_class/v1";
inline constexpr char kGameSchema[] = "mmil/game/v1";
inline constexpr char kDatasetSchema[] = "mmil/dataset/v1";
inline constexpr char kEquilibriumSchema[] = "mmil/equilibrium_result/v1";
inline constexpr char kTrainSchema[] = "mmil/train_result/v1";
inline constexpr char kMomentsSchema[] = "mmil/moments_eval/v1";
inline constexpr char kBoundsSchema[] = "mmil/bound_reports/v1";

// Every reader throws std::invalid_argument on a malformed document and runs
// the type's own Validate() where it has one.

Json ToJson(const TimedTable& table);  // nested [t][s][a]
TimedTable TimedTableFromJson(const Json& j);

Json ToJson(const TabularMdp& mdp);
TabularMdp MdpFromJson(const Json& j);

Json ToJson(const TimedPolicy& policy);
TimedPolicy PolicyFromJson(const Json& j);

Json ToJson(const BuiltMdp& built);
BuiltMdp BuiltMdpFromJson(const Json& j);

Json ToJson(const FunctionClass& cls);
FunctionClass FunctionClassFromJson(const Json& j);

Json ToJson(const Discriminator& disc);
Discriminator DiscriminatorFromJson(const Json& j);

Json ToJson(const GameSpec& game);
GameSpec GameFromJson(const Json& j);

Json ToJson(const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> TrajectoriesFromJson(const Json& j);

Json ToJson(const ExpertDataset& data);
ExpertDataset DatasetFromJson(const Json& j);

Json ToJson(const EquilibriumResult& result);
EquilibriumResult EquilibriumResultFromJson(const Json& j);
Json ToJson(const EquilibriumCertificate& cert);

Json ToJson(const TrainResult& result);
TrainResult TrainResultFromJson(const Json& j);

Json ToJson(const BoundReport& report);
BoundReport BoundReportFromJson(const Json& j);
Json ToJson(const std::vector<BoundReport>& reports);
std::vector<BoundReport> BoundReportsFromJson(const Json& j);

// Configs. Missing keys keep their defaults, unknown keys are rejected.
Json ToJson(const SolverConfig& config);
SolverConfig SolverConfigFromJson(const Json& j);
Json ToJson(const BcConfig& config);
BcConfig BcConfigFromJson(const Json& j);
Json ToJson(const AdvilConfig& config);
AdvilConfig AdvilConfigFromJson(const Json& j);
Json ToJson(const AdrilConfig& config);
AdrilConfig AdrilConfigFromJson(const Json& j);
Json ToJson(const DaequilConfig& config);
DaequilConfig DaequilConfigFromJson(const Json& j);
Json ToJson(const DaggerConfig& config);
DaggerConfig DaggerConfigFromJson(const Json& j);

// CSV traces with a header row and shortest round-trip number formatting.
std::string SolveTraceCsv(const std::vector<TraceRecord>& trace);
std::string AlgoTraceCsv(const std::vector<AlgoTraceRecord>& trace);

// Two-space indented dump with a trailing newline.
std::string DumpJson(const Json& j);
Json ParseJsonText(const std::string& text);
Json ReadJsonFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double x);

}  // namespace mmil

#endif  // MMIL_SERIALIZATION_H_
