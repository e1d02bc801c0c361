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


#include "mmil/cli.h"

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmil/algorithms.h"
#include "mmil/bounds.h"
#include "mmil/builders.h"
#include "mmil/equilibrium.h"
#include "mmil/mdp.h"
#include "mmil/moments.h"
#include "mmil/serialization.h"

namespace mmil {
namespace {

// Stream index for demonstrations generated on the fly, kept apart from the
// indices the trainers split from the same seed.
constexpr std::uint64_t kDemoStream = 0xde305eed00000000ULL;

// An instance named by a builder or loaded from a file.
struct Source {
  BuiltMdp built;
  bool has_expert = false;
  std::optional<ForestGrid> forest;
  std::optional<GameSpec> game;  // set when the file was a full game
  std::optional<std::vector<Trajectory>> trajectories;
};

int DefaultHorizon(const std::string& family) {
  if (family == "loop") return 6;
  if (family == "cliff") return 8;
  return 4;
}

bool IsBuilderName(const std::string& name) {
  return name == "loop" || name == "cliff" || name == "unicycle" ||
         name == "tree" || name == "forest";
}

Source Build(const std::string& family, int horizon, int branching) {
  Source src;
  src.has_expert = true;
  if (family == "forest") {
    if (horizon != 0) {
      throw std::invalid_argument("forest uses its fixed layout; drop --T");
    }
    src.forest = BuildForestGrid(DefaultForestSpec());
    src.built = src.forest->built;
    return src;
  }
  const int T = horizon == 0 ? DefaultHorizon(family) : horizon;
  if (family == "loop") {
    src.built = BuildLoop(T);
  } else if (family == "cliff") {
    src.built = BuildCliff(T);
  } else if (family == "unicycle") {
    src.built = BuildUnicycle(T);
  } else if (family == "tree") {
    src.built = BuildTree(branching, T);
  } else {
    throw std::invalid_argument("unknown mdp family '" + family + "'");
  }
  return src;
}

std::string SchemaOf(const Json& j) {
  if (j.is_object() && j.contains("schema") && j["schema"].is_string()) {
    return j["schema"].get<std::string>();
  }
  return "";
}

// Accepts a builder name, a built-mdp bundle, a game, a dataset or a bare mdp.
Source Resolve(const std::string& name, int horizon, int branching) {
  if (IsBuilderName(name)) return Build(name, horizon, branching);
  Json j = ReadJsonFile(name);
  const std::string schema = SchemaOf(j);
  Source src;
  if (schema == kGameSchema || (schema.empty() && j.contains("function_class"))) {
    src.game = GameFromJson(j);
    src.built.name = name;
    src.built.mdp = src.game->mdp;
    src.built.expert = src.game->expert;
    src.has_expert = true;
  } else if (schema == kBuiltMdpSchema ||
             (schema.empty() && j.contains("mdp") && j.contains("expert"))) {
    src.built = BuiltMdpFromJson(j);
    src.has_expert = true;
  } else if (schema == kDatasetSchema) {
    ExpertDataset data = DatasetFromJson(j);
    src.built.name = name;
    src.built.mdp = data.mdp;
    src.trajectories = data.trajectories;
    if (data.generator) {
      src.built.expert = *data.generator;
      src.has_expert = true;
    }
  } else {
    src.built.mdp = MdpFromJson(j);
    src.built.name = name;
  }
  return src;
}

// Loads an expert file into src: a policy, a bundle, or demonstrations.
void AttachExpert(Source& src, const std::string& path) {
  Json j = ReadJsonFile(path);
  const std::string schema = SchemaOf(j);
  if (schema == kDatasetSchema || (schema.empty() && j.contains("trajectories"))) {
    std::vector<Trajectory> trajs = TrajectoriesFromJson(j["trajectories"]);
    if (j.contains("mdp")) {
      ExpertDataset data = DatasetFromJson(j);
      if (data.mdp.horizon != src.built.mdp.horizon ||
          data.mdp.n_states != src.built.mdp.n_states ||
          data.mdp.n_actions != src.built.mdp.n_actions) {
        throw std::invalid_argument("dataset mdp does not match --mdp");
      }
      if (data.generator) {
        src.built.expert = *data.generator;
        src.has_expert = true;
      }
    } else if (j.contains("generator")) {
      src.built.expert = PolicyFromJson(j["generator"]);
      src.has_expert = true;
    }
    src.trajectories = std::move(trajs);
  } else {
    src.built.expert = schema == kBuiltMdpSchema ? BuiltMdpFromJson(j).expert
                                                 : PolicyFromJson(j);
    src.has_expert = true;
  }
  if (src.has_expert) CheckCompatible(src.built.mdp, src.built.expert);
}

void RequireExpert(const Source& src, const std::string& what) {
  if (!src.has_expert) {
    throw std::invalid_argument(what + " needs an expert policy (--expert)");
  }
}

void Emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    WriteTextFile(path, text);
  }
}

TimedPolicy ResolvePolicy(const std::string& spec, const Source& src) {
  const TabularMdp& mdp = src.built.mdp;
  if (spec == "uniform") {
    return TimedPolicy::Uniform(mdp.horizon, mdp.n_states, mdp.n_actions);
  }
  if (spec == "expert") {
    RequireExpert(src, "--policy expert");
    return src.built.expert;
  }
  Json j = ReadJsonFile(spec);
  TimedPolicy policy = SchemaOf(j) == kTrainSchema ||
                               SchemaOf(j) == kEquilibriumSchema
                           ? PolicyFromJson(j["policy"])
                           : PolicyFromJson(j);
  CheckCompatible(mdp, policy);
  return policy;
}

GameSpec ResolveGame(const Source& src, PayoffKind kind,
                     const std::string& class_path, std::uint64_t seed) {
  RequireExpert(src, "a game");
  if (!class_path.empty()) {
    return MakeGame(kind, src.built.mdp, src.built.expert,
                    FunctionClassFromJson(ReadJsonFile(class_path)));
  }
  if (src.game) {
    if (src.game->payoff_kind != kind) {
      return MakeGame(kind, src.game->mdp, src.game->expert,
                      src.game->function_class);
    }
    return *src.game;
  }
  return UpperBoundGame(kind, src.built, seed);
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

struct MdpBuildArgs {
  std::string family;
  int horizon = 0;
  int branching = 2;
  std::string out;
  std::string mdp_out;
};

int RunMdpBuild(const MdpBuildArgs& a, std::ostream& out) {
  Source src = Build(a.family, a.horizon, a.branching);
  Emit(a.out, DumpJson(ToJson(src.built)), out);
  if (!a.mdp_out.empty()) WriteTextFile(a.mdp_out, DumpJson(ToJson(src.built.mdp)));
  return kExitOk;
}

struct MomentsArgs {
  std::string game = "u1";
  std::string mdp = "loop";
  int horizon = 0;
  int branching = 2;
  std::string expert;
  std::string policy = "uniform";
  std::string class_path;
  double delta = 0.05;
  std::uint64_t seed = 0;
  std::string out;
  std::string class_out;
};

int RunMomentsEval(const MomentsArgs& a, std::ostream& out) {
  Source src = Resolve(a.mdp, a.horizon, a.branching);
  if (!a.expert.empty()) AttachExpert(src, a.expert);
  const PayoffKind kind = ParsePayoffKind(a.game);
  GameSpec game = ResolveGame(src, kind, a.class_path, a.seed);
  TimedPolicy policy = ResolvePolicy(a.policy, src);
  BestResponse br = BestResponseDiscriminator(game, policy);
  EquilibriumCertificate cert =
      CheckEquilibrium(game, policy, br.discriminator, a.delta * game.payoff_scale_k);
  Json j = {{"schema", kMomentsSchema},
            {"payoff_kind", ToString(kind)},
            {"instance", src.built.name},
            {"class_id", game.function_class.id},
            {"payoff_scale_k", game.payoff_scale_k},
            {"recoverability", game.recoverability},
            {"vertex_payoffs", VertexPayoffs(game, policy)},
            {"best_response",
             {{"vertex", br.vertex},
              {"sup_payoff", br.sup_payoff},
              {"discriminator", ToJson(br.discriminator)}}},
            {"certificate", ToJson(cert)},
            {"delta", a.delta},
            {"imitation_gap", PolicyValue(game.mdp, game.expert) -
                                  PolicyValue(game.mdp, policy)}};
  Emit(a.out, DumpJson(j), out);
  if (!a.class_out.empty()) {
    WriteTextFile(a.class_out, DumpJson(ToJson(game.function_class)));
  }
  return kExitOk;
}

struct SolveArgs {
  std::string game = "loop";
  int horizon = 0;
  int branching = 2;
  std::string expert;
  std::string payoff = "u1";
  std::string mode = "primal";
  double delta = 0.05;
  std::uint64_t seed = 0;
  int max_iters = 2000;
  std::string config;
  std::string class_path;
  std::string out;
  std::string trace;
  bool require_cert = false;
};

int RunSolve(const SolveArgs& a, const CLI::App& cmd, std::ostream& out) {
  Source src = Resolve(a.game, a.horizon, a.branching);
  if (!a.expert.empty()) AttachExpert(src, a.expert);
  const PayoffKind kind = ParsePayoffKind(a.payoff);
  SolverConfig config;
  if (!a.config.empty()) config = SolverConfigFromJson(ReadJsonFile(a.config));
  // Explicit flags win over the config file.
  if (a.config.empty() || cmd.count("--mode")) config.mode = ParseSolverMode(a.mode);
  if (a.config.empty() || cmd.count("--delta")) config.target_delta = a.delta;
  if (a.config.empty() || cmd.count("--seed")) config.seed = a.seed;
  if (a.config.empty() || cmd.count("--max-iters")) {
    config.max_outer_iters = a.max_iters;
  }
  config.Validate();
  GameSpec game = ResolveGame(src, kind, a.class_path, config.seed);
  EquilibriumResult res = Solve(game, config);
  Json j = ToJson(res);
  const double gap =
      PolicyValue(game.mdp, game.expert) - PolicyValue(game.mdp, res.policy);
  j["context"] = {{"instance", src.built.name},
                  {"payoff_kind", ToString(kind)},
                  {"payoff_scale_k", game.payoff_scale_k},
                  {"recoverability", game.recoverability},
                  {"imitation_gap", gap},
                  {"config", ToJson(config)}};
  Emit(a.out, DumpJson(j), out);
  if (!a.trace.empty()) WriteTextFile(a.trace, SolveTraceCsv(res.trace));
  return a.require_cert && !res.certified ? kExitUncertified : kExitOk;
}

struct AlgoArgs {
  std::string name;
  std::string mdp = "cliff";
  int horizon = 0;
  int branching = 2;
  std::string expert;
  std::string config;
  std::string class_path;
  int demos = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string trace;
  std::string policy_out;
  bool require_cert = false;
};

int RunAlgo(const AlgoArgs& a, const CLI::App& cmd, std::ostream& out) {
  Source src = Resolve(a.mdp, a.horizon, a.branching);
  if (!a.expert.empty()) AttachExpert(src, a.expert);
  const Json cfg = a.config.empty() ? Json::object() : ReadJsonFile(a.config);
  const bool seed_flag = cmd.count("--seed") > 0;
  if (a.demos < 1) throw std::invalid_argument("--demos must be >= 1");

  auto dataset = [&](std::uint64_t seed) {
    ExpertDataset data;
    data.mdp = src.built.mdp;
    if (src.has_expert) data.generator = src.built.expert;
    if (src.trajectories) {
      data.trajectories = *src.trajectories;
    } else {
      RequireExpert(src, "generating demonstrations");
      data.trajectories =
          Rollout(data.mdp, src.built.expert, SplitSeed(seed, kDemoStream), a.demos);
    }
    data.Validate();
    return data;
  };

  TrainResult train;
  Json details = Json::object();
  Json config_json;
  if (a.name == "bc") {
    BcConfig c = BcConfigFromJson(cfg);
    train.policy = BehavioralCloning(dataset(a.seed), c);
    train.converged = true;
    config_json = ToJson(c);
    if (src.has_expert) {
      AlgoTraceRecord r;
      r.exact_gap = PolicyValue(src.built.mdp, src.built.expert) -
                    PolicyValue(src.built.mdp, train.policy);
      train.trace.push_back(r);
    }
  } else if (a.name == "advil") {
    AdvilConfig c = AdvilConfigFromJson(cfg);
    train = AdvilTrain(dataset(a.seed), c);
    config_json = ToJson(c);
  } else if (a.name == "adril") {
    AdrilConfig c = AdrilConfigFromJson(cfg);
    if (seed_flag || !cfg.contains("seed")) c.seed = a.seed;
    ExpertDataset data = dataset(c.seed);
    AdrilResult res = AdrilTrain(data, c);
    train = res.train;
    details = {{"final_ipm", res.final_ipm},
               {"max_invariant_residual", res.max_invariant_residual},
               {"cost_snapshot", res.state.cost_snapshot},
               {"learner_trajectories",
                static_cast<int>(res.state.aggregated_learner_data.size())}};
    config_json = ToJson(c);
  } else if (a.name == "daequil" || a.name == "dagger") {
    RequireExpert(src, a.name);
    QueryableExpert expert{src.built.expert};
    if (a.name == "daequil") {
      DaequilConfig c = DaequilConfigFromJson(cfg);
      if (seed_flag || !cfg.contains("seed")) c.seed = a.seed;
      FunctionClass cls =
          !a.class_path.empty()
              ? FunctionClassFromJson(ReadJsonFile(a.class_path))
              : (src.forest ? ForestSwerveClass(*src.forest)
                            : DefaultRewardClass(src.built.mdp));
      DaequilResult res = DaequilTrain(src.built.mdp, expert, cls, c);
      train = res.train;
      details = {{"class_id", cls.id},
                 {"round_losses", res.round_losses},
                 {"round_max_payoffs", res.round_max_payoffs},
                 {"round_vertices", res.round_vertices},
                 {"max_identity_residual", res.max_identity_residual}};
      config_json = ToJson(c);
    } else {
      DaggerConfig c = DaggerConfigFromJson(cfg);
      if (seed_flag || !cfg.contains("seed")) c.seed = a.seed;
      DaggerResult res = DaggerTrain(src.built.mdp, expert, c);
      train = res.train;
      details = {{"aggregate_sizes", res.aggregate_sizes}};
      config_json = ToJson(c);
    }
  } else {
    throw std::invalid_argument("unknown algorithm '" + a.name + "'");
  }

  Json j = ToJson(train);
  j["context"] = {{"algorithm", a.name},
                  {"instance", src.built.name},
                  {"seed", a.seed},
                  {"config", config_json},
                  {"details", details}};
  if (src.has_expert) {
    j["context"]["imitation_gap"] =
        PolicyValue(src.built.mdp, src.built.expert) -
        PolicyValue(src.built.mdp, train.policy);
  }
  Emit(a.out, DumpJson(j), out);
  if (!a.trace.empty()) WriteTextFile(a.trace, AlgoTraceCsv(train.trace));
  if (!a.policy_out.empty()) {
    WriteTextFile(a.policy_out, DumpJson(ToJson(train.policy)));
  }
  return a.require_cert && !train.converged ? kExitUncertified : kExitOk;
}

struct BoundsArgs {
  std::string suite = "all";
  std::string out;
  std::string markdown;
  bool require_cert = false;
};

int RunBounds(const BoundsArgs& a, std::ostream& out) {
  std::vector<BoundReport> reports = RunSuite(a.suite);
  Emit(a.out, DumpJson(ToJson(reports)), out);
  std::string md_path = a.markdown;
  if (md_path.empty() && !a.out.empty()) {
    const std::size_t dot = a.out.find_last_of('.');
    const std::size_t slash = a.out.find_last_of('/');
    const bool has_ext = dot != std::string::npos &&
                         (slash == std::string::npos || dot > slash);
    md_path = (has_ext ? a.out.substr(0, dot) : a.out) + ".md";
  }
  if (!md_path.empty()) WriteTextFile(md_path, MarkdownSummary(reports));
  if (a.require_cert) {
    for (const BoundReport& r : reports) {
      if (!r.satisfied) return kExitUncertified;
    }
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Moment-matching imitation learning on tabular MDPs", "mmil"};
  app.require_subcommand(1);

  CLI::App* mdp = app.add_subcommand("mdp", "Build example MDPs");
  mdp->require_subcommand(1);
  MdpBuildArgs build_args;
  CLI::App* build = mdp->add_subcommand("build", "Write a built MDP and expert");
  build->add_option("family", build_args.family,
                    "loop, cliff, unicycle, tree or forest")
      ->required()
      ->check(CLI::IsMember({"loop", "cliff", "unicycle", "tree", "forest"}));
  build->add_option("--T", build_args.horizon, "Horizon")->check(CLI::PositiveNumber);
  build->add_option("--branching", build_args.branching, "Tree branching factor");
  build->add_option("--out", build_args.out, "Output path for the bundle");
  build->add_option("--mdp-out", build_args.mdp_out, "Output path for the bare mdp");

  CLI::App* moments = app.add_subcommand("moments", "Evaluate moment payoffs");
  moments->require_subcommand(1);
  MomentsArgs mom;
  CLI::App* eval = moments->add_subcommand("eval", "Payoff and best response");
  eval->add_option("--game", mom.game, "u1, u2, u3 or u4")
      ->check(CLI::IsMember({"u1", "u2", "u3", "u4"}));
  eval->add_option("--mdp", mom.mdp, "Builder name or JSON file");
  eval->add_option("--T", mom.horizon, "Horizon for builders")->check(CLI::PositiveNumber);
  eval->add_option("--branching", mom.branching, "Tree branching factor");
  eval->add_option("--expert", mom.expert, "Expert policy file");
  eval->add_option("--policy", mom.policy, "uniform, expert or a policy file");
  eval->add_option("--class", mom.class_path, "Function class file");
  eval->add_option("--delta", mom.delta, "Accuracy for the certificate");
  eval->add_option("--seed", mom.seed, "Seed for random anchors");
  eval->add_option("--out", mom.out, "Output path");
  eval->add_option("--class-out", mom.class_out, "Write the class used");

  SolveArgs sol;
  CLI::App* solve = app.add_subcommand("solve", "Find an approximate equilibrium");
  solve->add_option("--game,--mdp", sol.game, "Builder name or JSON file");
  solve->add_option("--T", sol.horizon, "Horizon for builders")->check(CLI::PositiveNumber);
  solve->add_option("--branching", sol.branching, "Tree branching factor");
  solve->add_option("--expert", sol.expert, "Expert policy file");
  solve->add_option("--payoff", sol.payoff, "u1, u2, u3 or u4")
      ->check(CLI::IsMember({"u1", "u2", "u3", "u4"}));
  solve->add_option("--mode", sol.mode, "primal or dual")
      ->check(CLI::IsMember({"primal", "dual"}));
  solve->add_option("--delta", sol.delta, "Target accuracy");
  solve->add_option("--seed", sol.seed, "Seed");
  solve->add_option("--max-iters", sol.max_iters, "Outer iteration budget");
  solve->add_option("--config", sol.config, "Solver config JSON");
  solve->add_option("--class", sol.class_path, "Function class file");
  solve->add_option("--out", sol.out, "Result JSON path");
  solve->add_option("--trace", sol.trace, "Trace CSV path");
  solve->add_flag("--require-cert", sol.require_cert, "Exit 2 when uncertified");

  AlgoArgs alg;
  CLI::App* algo = app.add_subcommand("algo", "Train an imitation learner");
  algo->add_option("name", alg.name, "advil, adril, daequil, bc or dagger")
      ->required()
      ->check(CLI::IsMember({"advil", "adril", "daequil", "bc", "dagger"}));
  algo->add_option("--mdp", alg.mdp, "Builder name or JSON file");
  algo->add_option("--T", alg.horizon, "Horizon for builders")->check(CLI::PositiveNumber);
  algo->add_option("--branching", alg.branching, "Tree branching factor");
  algo->add_option("--expert", alg.expert, "Expert policy or dataset file");
  algo->add_option("--config", alg.config, "Algorithm config JSON");
  algo->add_option("--class", alg.class_path, "Function class file for daequil");
  algo->add_option("--demos", alg.demos, "Demonstrations to generate");
  algo->add_option("--seed", alg.seed, "Seed");
  algo->add_option("--out", alg.out, "Result JSON path");
  algo->add_option("--trace", alg.trace, "Trace CSV path");
  algo->add_option("--policy-out", alg.policy_out, "Trained policy JSON path");
  algo->add_flag("--require-cert", alg.require_cert, "Exit 2 when not converged");

  CLI::App* bounds = app.add_subcommand("bounds", "Bound verification lab");
  bounds->require_subcommand(1);
  BoundsArgs bnd;
  CLI::App* run = bounds->add_subcommand("run", "Run a report suite");
  run->add_option("--suite", bnd.suite, "all, lb, ub, lemma6 or recover")
      ->check(CLI::IsMember({"all", "lb", "ub", "lemma6", "recover"}));
  run->add_option("--out", bnd.out, "Report JSON path");
  run->add_option("--markdown", bnd.markdown, "Summary table path");
  run->add_flag("--require-cert", bnd.require_cert, "Exit 2 if any report fails");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (CLI::App* sub = &app; !sub->get_subcommands().empty();) {
      sub = sub->get_subcommands().front();
      target = sub;
    }
    out << target->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*build) return RunMdpBuild(build_args, out);
    if (*eval) return RunMomentsEval(mom, out);
    if (*solve) return RunSolve(sol, *solve, out);
    if (*algo) return RunAlgo(alg, *algo, out);
    if (*run) return RunBounds(bnd, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace mmil
