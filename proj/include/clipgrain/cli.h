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

// Command-line front end. Each Cmd* function is callable directly so tests
// can drive a command without spawning a process.

#ifndef CLIPGRAIN_CLI_H_
#define CLIPGRAIN_CLI_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clipgrain/experiment.h"

namespace clipgrain {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitGradcheck = 2;
inline constexpr int kExitTraining = 3;

inline constexpr const char* kSeedEnvVar = "CLIPGRAIN_SEED";
inline constexpr const char* kManifestName = "manifest.json";

struct CliOptions {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::string> seeds;
  std::optional<size_t> parallel;
  bool force = false;
  std::optional<std::string> bounds;
  // "key.path=value" edits applied to the config document before parsing.
  std::vector<std::string> overrides;
};

// Resolves the effective config. Precedence, highest first: flags, the seed
// environment variable, the config file, built-in defaults.
ExperimentConfig ResolveConfig(const CliOptions& options,
                               const std::optional<std::string>& env_seeds);

// Applies one "a.b.c=value" edit. The value is read as JSON when it parses
// and as a plain string otherwise.
void ApplyOverride(nlohmann::json& doc, const std::string& assignment);

// Makes `dir` ready for fresh output. A non-empty directory is refused
// unless `force` is set, and even then only if it holds a manifest written
// by this tool.
void PrepareOutputDir(const std::string& dir, bool force);

int CmdGradcheck(const ExperimentConfig& config, bool force, std::ostream& log,
                 const GradientFunction& gradient = nullptr);
int CmdTrain(const ExperimentConfig& config, bool force, std::ostream& log);
int CmdExposure(const ExperimentConfig& config, bool force, std::ostream& log);
int CmdSweep(const ExperimentConfig& config, bool force, std::ostream& log,
             SweepResult* result = nullptr);

// Parses argv, dispatches a subcommand, and maps errors to exit codes.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace clipgrain

#endif  // CLIPGRAIN_CLI_H_
