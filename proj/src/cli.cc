// Copyright 2026 The Clipgrain Authors
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

#include "clipgrain/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "clipgrain/errors.h"
#include "clipgrain/numerics.h"
#include "clipgrain/parallel.h"

namespace clipgrain {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kParse:
    case ErrorCode::kIo:
    case ErrorCode::kInvalidInput:
      return kExitConfig;
    case ErrorCode::kOracleFailure:
      return kExitGradcheck;
    default:
      return kExitTraining;
  }
}

void WriteFile(const fs::path& path,
               const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

void WriteJson(const fs::path& path, const json& doc) {
  WriteFile(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

// The output directory is deliberately left out so that identical runs
// written to different places produce identical trees.
void WriteManifest(const ExperimentConfig& config, const std::string& command) {
  json resolved = ConfigToJson(config);
  resolved.erase("output_dir");
  WriteJson(fs::path(config.output_dir) / kManifestName,
            json{{"tool", "clipgrain"}, {"command", command}, {"config", resolved}});
}

std::vector<double> ParseBoundList(const std::string& text) {
  std::vector<double> bounds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw Error(ErrorCode::kConfig, "--bounds: '" + item + "' is not a number");
    }
    bounds.push_back(v);
  }
  return bounds;
}

struct RunOutcome {
  TrainTrajectory trajectory;
  GapMetrics metrics;
};

}  // namespace

void ApplyOverride(json& doc, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kConfig,
                "--set: expected key.path=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw Error(ErrorCode::kConfig, "--set: empty key segment in '" + key + "'");
    parts.push_back(part);
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) {
      throw Error(ErrorCode::kConfig, "--set: '" + parts[i] + "' is not a section");
    }
    node = &(*node)[parts[i]];
  }
  if (node->is_null()) *node = json::object();
  if (!node->is_object()) {
    throw Error(ErrorCode::kConfig, "--set: cannot assign into '" + key + "'");
  }
  (*node)[parts.back()] = std::move(value);
}

ExperimentConfig ResolveConfig(const CliOptions& options,
                               const std::optional<std::string>& env_seeds) {
  json doc = json::object();
  if (!options.config_path.empty()) {
    std::ifstream in(options.config_path);
    if (!in) {
      throw Error(ErrorCode::kConfig,
                  "cannot open config '" + options.config_path + "'");
    }
    try {
      doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kConfig, options.config_path + ": " + e.what());
    }
  }
  for (const std::string& o : options.overrides) ApplyOverride(doc, o);
  ExperimentConfig config = ParseExperimentConfig(doc);

  if (env_seeds && !env_seeds->empty()) {
    try {
      config.seeds = ParseSeedList(*env_seeds);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string(kSeedEnvVar) + ": " + e.what());
    }
  }
  if (options.seeds) config.seeds = ParseSeedList(*options.seeds);
  if (options.out) config.output_dir = *options.out;
  if (options.parallel) config.parallel = *options.parallel;
  if (options.bounds) config.sweep_bounds = ParseBoundList(*options.bounds);
  return config;
}

void PrepareOutputDir(const std::string& dir, bool force) {
  const fs::path path(dir);
  if (fs::exists(path)) {
    if (!fs::is_directory(path)) {
      throw Error(ErrorCode::kConfig, "output path '" + dir + "' is not a directory");
    }
    if (!fs::is_empty(path)) {
      if (!force) {
        throw Error(ErrorCode::kConfig, "output directory '" + dir +
                                            "' is not empty; pass --force to replace it");
      }
      if (!fs::exists(path / kManifestName)) {
        throw Error(ErrorCode::kConfig,
                    "refusing to replace '" + dir + "': it has no " +
                        kManifestName + " from a previous run");
      }
      fs::remove_all(path);
    }
  }
  fs::create_directories(path);
}

int CmdGradcheck(const ExperimentConfig& config, bool force, std::ostream& log,
                 const GradientFunction& gradient) {
  ValidateExperimentConfig(config, /*needs_data=*/false);
  PrepareOutputDir(config.output_dir, force);
  WriteManifest(config, "gradcheck");
  const std::vector<GradcheckRow> rows =
      RunGradcheck(config.gradcheck, config.seeds.front(), gradient);
  WriteFile(fs::path(config.output_dir) / "gradcheck.csv",
            [&](std::ostream& out) { WriteGradcheckCsv(rows, out); });
  bool ok = true;
  for (const GradcheckRow& r : rows) {
    log << r.model << ": max relative error " << FormatReal(r.max_relative_error)
        << " over " << r.draws << " draws " << (r.passed ? "ok" : "FAILED") << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitGradcheck;
}

int CmdTrain(const ExperimentConfig& config, bool force, std::ostream& log) {
  ValidateExperimentConfig(config);
  const TrainTestSplit data = LoadData(config);
  const Model model = BuildModel(config.model, data.train.dim);
  PrepareOutputDir(config.output_dir, force);
  WriteManifest(config, "train");

  const size_t n_policies = config.policies.size();
  std::vector<RunOutcome> outcomes(n_policies * config.seeds.size());
  ParallelFor(outcomes.size(), config.parallel, [&](size_t task) {
    const ClippingPolicy& policy = config.policies[task % n_policies];
    const uint64_t seed = config.seeds[task / n_policies];
    TrainConfig cfg = config.train;
    cfg.policy = policy;
    cfg.seed = seed;
    try {
      outcomes[task].trajectory = Train(model, data.train, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "policy " + PolicyTag(policy) + ", seed " +
                                std::to_string(seed) + ": " + e.what());
    }
    outcomes[task].metrics = GeneralizationGap(
        model, outcomes[task].trajectory.final_params, data.train, data.test);
  });

  json runs = json::array();
  for (size_t task = 0; task < outcomes.size(); ++task) {
    const std::string tag = PolicyTag(config.policies[task % n_policies]);
    const uint64_t seed = config.seeds[task / n_policies];
    const RunOutcome& o = outcomes[task];
    const fs::path file = fs::path(config.output_dir) / tag / std::to_string(seed) /
                          "trajectory.csv";
    WriteFile(file, [&](std::ostream& out) { WriteTrajectoryCsv(o.trajectory, out); });
    runs.push_back({{"policy", tag},
                    {"seed", seed},
                    {"trajectory", tag + "/" + std::to_string(seed) + "/trajectory.csv"},
                    {"train_metric", o.metrics.train_metric},
                    {"test_metric", o.metrics.test_metric},
                    {"gap", o.metrics.gap}});
    log << tag << " seed " << seed << ": train " << FormatReal(o.metrics.train_metric)
        << " test " << FormatReal(o.metrics.test_metric) << '\n';
  }
  WriteJson(fs::path(config.output_dir) / "summary.json", json{{"runs", runs}});
  return kExitOk;
}

int CmdExposure(const ExperimentConfig& config, bool force, std::ostream& log) {
  ValidateExperimentConfig(config);
  const TrainTestSplit data = LoadData(config);
  const Model model = BuildModel(config.model, data.train.dim);
  PrepareOutputDir(config.output_dir, force);
  WriteManifest(config, "exposure");
  const ExposureReport report =
      RunSecretSharer(data.train, data.test, model, config.train, config.policies,
                      config.secret_sharer, config.seeds, config.parallel);
  const fs::path dir(config.output_dir);
  WriteFile(dir / "exposure.csv",
            [&](std::ostream& out) { WriteExposureCsv(report, out); });
  WriteFile(dir / "exposure_table.txt",
            [&](std::ostream& out) { WriteExposureTable(report, out); });
  WriteExposureTable(report, log);
  return kExitOk;
}

int CmdSweep(const ExperimentConfig& config, bool force, std::ostream& log,
             SweepResult* result) {
  if (config.sweep_bounds.empty()) {
    throw Error(ErrorCode::kConfig, "sweep.bounds: must be non-empty");
  }
  ValidateExperimentConfig(config);
  const TrainTestSplit data = LoadData(config);
  const Model model = BuildModel(config.model, data.train.dim);
  PrepareOutputDir(config.output_dir, force);
  WriteManifest(config, "sweep");
  SweepResult sweep = RunBoundSweep(model, data, config.train, config.sweep_bounds,
                                    config.seeds, config.parallel);
  const fs::path dir(config.output_dir);
  WriteFile(dir / "sweep.csv", [&](std::ostream& out) { WriteSweepRunsCsv(sweep, out); });
  WriteFile(dir / "sweep_summary.csv",
            [&](std::ostream& out) { WriteSweepSummaryCsv(sweep, out); });
  for (const SweepSummary& s : sweep.summary) {
    log << s.policy << ": mean test " << FormatReal(s.mean_test_metric) << " rank "
        << s.rank << (s.selected ? " (selected)" : "") << '\n';
  }
  if (result) *result = std::move(sweep);
  return kExitOk;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-parallel SGD simulator with per-core gradient clipping"};
  app.require_subcommand(1);
  CliOptions options;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "JSON config file");
    sub->add_option("--out", options.out, "Output directory");
    sub->add_option("--seeds", options.seeds, "Comma-separated seed list");
    sub->add_option("--parallel", options.parallel, "Concurrent runs")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--force", options.force,
                  "Replace an output directory from a previous run");
    sub->add_option("--set", options.overrides, "Config override key.path=value");
  };
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Check gradients by finite differences");
  CLI::App* train = app.add_subcommand("train", "Train every (policy, seed) pair");
  CLI::App* exposure = app.add_subcommand("exposure", "Run the canary exposure audit");
  CLI::App* sweep = app.add_subcommand("sweep", "Grid-search the per-core bound");
  for (CLI::App* sub : {gradcheck, train, exposure, sweep}) add_common(sub);
  sweep->add_option("--bounds", options.bounds, "Comma-separated bounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const char* env = std::getenv(kSeedEnvVar);
    const ExperimentConfig config = ResolveConfig(
        options, env ? std::optional<std::string>(env) : std::nullopt);
    if (gradcheck->parsed()) return CmdGradcheck(config, options.force, out);
    if (train->parsed()) return CmdTrain(config, options.force, out);
    if (exposure->parsed()) return CmdExposure(config, options.force, out);
    return CmdSweep(config, options.force, out);
  } catch (const Error& e) {
    err << "clipgrain: " << ErrorCodeName(e.code()) << ": " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "clipgrain: io: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace clipgrain
