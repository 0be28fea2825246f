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

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "clipgrain/errors.h"

namespace clipgrain {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() /
            (std::string("clipgrain_cli_") + info->name() + "_" +
             std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    ::unsetenv(kSeedEnvVar);
  }
  void TearDown() override {
    fs::remove_all(root_);
    ::unsetenv(kSeedEnvVar);
  }

  std::string WriteConfig(const json& doc) {
    const fs::path p = root_ / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p.string();
  }

  int Run(std::vector<std::string> args) {
    args.insert(args.begin(), "clipgrain");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return RunCli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string Out(const std::string& name) const { return (root_ / name).string(); }

  fs::path root_;
  std::ostringstream out_, err_;
};

json SmallConfig() {
  return json::parse(R"({
    "model": {"kind": "logistic_regression", "classes": 3},
    "data": {"synthetic": {"dim": 4, "classes": 3, "train_size": 30, "test_size": 20, "seed": 2}},
    "train": {"iterations": 40, "cores": 2, "per_core_batch": 2, "learning_rate": 0.1,
              "eval_every": 10},
    "policies": [{"kind": "none"}, {"kind": "per_core", "bound": 2.5}],
    "seeds": [1, 2, 3]
  })");
}

std::map<std::string, std::string> ReadTree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(entry.path(), dir).string()] = ss.str();
  }
  return files;
}

TEST_F(CliTest, GradcheckPassesWithDefaults) {
  EXPECT_EQ(Run({"gradcheck", "--out", Out("g"), "--set", "gradcheck.draws=20"}), kExitOk)
      << err_.str();
  std::ifstream in(Out("g") + "/gradcheck.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_TRUE(fs::exists(Out("g") + "/manifest.json"));
}

TEST_F(CliTest, GradcheckFailureExitsTwo) {
  ExperimentConfig c;
  c.output_dir = Out("g");
  c.gradcheck.draws = 3;
  std::ostringstream log;
  const int code = CmdGradcheck(
      c, false, log, [](const Model& m, std::span<const double> w, std::span<const Example> b) {
        RealVector g = m.BatchGradient(w, b);
        for (double& v : g) v *= 1.01;
        return g;
      });
  EXPECT_EQ(code, kExitGradcheck);
  EXPECT_NE(log.str().find("FAILED"), std::string::npos);
}

TEST_F(CliTest, TrainWritesOneTrajectoryPerRun) {
  const std::string cfg = WriteConfig(SmallConfig());
  ASSERT_EQ(Run({"train", "--config", cfg, "--out", Out("t")}), kExitOk) << err_.str();
  for (const char* tag : {"none", "per_core@2.5"}) {
    for (int seed = 1; seed <= 3; ++seed) {
      const fs::path p = fs::path(Out("t")) / tag / std::to_string(seed) / "trajectory.csv";
      EXPECT_TRUE(fs::exists(p)) << p;
    }
  }
  std::ifstream in(Out("t") + "/summary.json");
  const json summary = json::parse(in);
  EXPECT_EQ(summary["runs"].size(), 6u);
}

TEST_F(CliTest, RefusesToOverwriteWithoutForce) {
  const std::string cfg = WriteConfig(SmallConfig());
  ASSERT_EQ(Run({"train", "--config", cfg, "--out", Out("t"), "--seeds", "1"}), kExitOk);
  EXPECT_EQ(Run({"train", "--config", cfg, "--out", Out("t"), "--seeds", "1"}),
            kExitConfig);
  EXPECT_NE(err_.str().find("--force"), std::string::npos);
  EXPECT_EQ(Run({"train", "--config", cfg, "--out", Out("t"), "--seeds", "1", "--force"}),
            kExitOk);
}

TEST_F(CliTest, ForceDoesNotDeleteForeignDirectories) {
  fs::create_directories(Out("mine"));
  std::ofstream(Out("mine") + "/notes.txt") << "keep";
  const std::string cfg = WriteConfig(SmallConfig());
  EXPECT_EQ(Run({"train", "--config", cfg, "--out", Out("mine"), "--force"}), kExitConfig);
  EXPECT_TRUE(fs::exists(Out("mine") + "/notes.txt"));
}

TEST_F(CliTest, SameSeedGivesIdenticalTrees) {
  const std::string cfg = WriteConfig(SmallConfig());
  ASSERT_EQ(Run({"train", "--config", cfg, "--out", Out("a"), "--seeds", "7"}), kExitOk);
  ASSERT_EQ(Run({"train", "--config", cfg, "--out", Out("b"), "--seeds", "7"}), kExitOk);
  const auto a = ReadTree(Out("a"));
  EXPECT_EQ(a.size(), 4u);
  EXPECT_EQ(a, ReadTree(Out("b")));
}

TEST_F(CliTest, ParallelRunsMatchSerialOutputs) {
  const std::string cfg = WriteConfig(SmallConfig());
  ASSERT_EQ(Run({"train", "--config", cfg, "--out", Out("a")}), kExitOk);
  ASSERT_EQ(Run({"train", "--config", cfg, "--out", Out("b"), "--parallel", "3"}), kExitOk);
  auto a = ReadTree(Out("a"));
  auto b = ReadTree(Out("b"));
  // Only the manifest records the parallelism.
  EXPECT_NE(a.at(kManifestName), b.at(kManifestName));
  a.erase(kManifestName);
  b.erase(kManifestName);
  EXPECT_EQ(a.size(), 7u);
  EXPECT_EQ(a, b);
}

TEST_F(CliTest, SweepRejectsEmptyBounds) {
  json doc = SmallConfig();
  doc["sweep"] = {{"bounds", json::array()}};
  const std::string cfg = WriteConfig(doc);
  EXPECT_EQ(Run({"sweep", "--config", cfg, "--out", Out("s")}), kExitConfig);
  EXPECT_NE(err_.str().find("sweep.bounds"), std::string::npos);
}

TEST_F(CliTest, SweepWithHugeBoundMatchesBaseline) {
  const std::string cfg = WriteConfig(SmallConfig());
  ExperimentConfig c = ParseExperimentConfig(SmallConfig());
  c.sweep_bounds = {1e9};
  c.output_dir = Out("s");
  std::ostringstream log;
  SweepResult r;
  ASSERT_EQ(CmdSweep(c, false, log, &r), kExitOk);
  ASSERT_EQ(r.runs.size(), 6u);
  for (size_t i = 0; i < r.runs.size(); i += 2) {
    EXPECT_EQ(r.runs[i].metrics.test_metric, r.runs[i + 1].metrics.test_metric);
    EXPECT_EQ(r.runs[i].metrics.train_metric, r.runs[i + 1].metrics.train_metric);
  }
  EXPECT_TRUE(fs::exists(Out("s") + "/sweep_summary.csv"));
}

TEST_F(CliTest, SeedPrecedence) {
  CliOptions opts;
  opts.config_path = WriteConfig(SmallConfig());
  EXPECT_EQ(ResolveConfig(opts, std::nullopt).seeds, (std::vector<uint64_t>{1, 2, 3}));
  EXPECT_EQ(ResolveConfig(opts, "9,8").seeds, (std::vector<uint64_t>{9, 8}));
  opts.seeds = "5";
  EXPECT_EQ(ResolveConfig(opts, "9,8").seeds, (std::vector<uint64_t>{5}));
  opts.seeds.reset();
  EXPECT_THROW(ResolveConfig(opts, "nine"), Error);
}

TEST_F(CliTest, EnvSeedsReachTheRun) {
  const std::string cfg = WriteConfig(SmallConfig());
  ::setenv(kSeedEnvVar, "11", 1);
  ASSERT_EQ(Run({"train", "--config", cfg, "--out", Out("t")}), kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(Out("t") + "/none/11/trajectory.csv"));
  EXPECT_FALSE(fs::exists(Out("t") + "/none/1"));
}

TEST_F(CliTest, SetOverridesConfigValues) {
  json doc;
  ApplyOverride(doc, "train.learning_rate=0.25");
  ApplyOverride(doc, "model.kind=mlp");
  ApplyOverride(doc, "seeds=[4,5]");
  EXPECT_EQ(doc["train"]["learning_rate"], 0.25);
  EXPECT_EQ(doc["model"]["kind"], "mlp");
  EXPECT_EQ(doc["seeds"], json::parse("[4,5]"));
  EXPECT_THROW(ApplyOverride(doc, "no_equals_sign"), Error);

  const std::string cfg = WriteConfig(SmallConfig());
  EXPECT_EQ(Run({"train", "--config", cfg, "--out", Out("t"), "--set",
                 "train.learning_rate=-1"}),
            kExitConfig);
  EXPECT_NE(err_.str().find("train.learning_rate"), std::string::npos);
}

TEST_F(CliTest, BadInvocationsExitOne) {
  EXPECT_EQ(Run({}), kExitConfig);
  EXPECT_EQ(Run({"train", "--config", Out("missing.json")}), kExitConfig);
  EXPECT_EQ(Run({"train", "--bogus"}), kExitConfig);
}

TEST_F(CliTest, DivergentTrainingExitsThree) {
  const std::string cfg = WriteConfig(SmallConfig());
  EXPECT_EQ(Run({"train", "--config", cfg, "--out", Out("t"), "--set",
                 "train.learning_rate=1e300", "--set",
                 "model.kind=linear_regression", "--set",
                 "data.synthetic.task=regression"}),
            kExitTraining)
      << err_.str();
}

TEST_F(CliTest, BinaryRunsEndToEnd) {
  const std::string cfg = WriteConfig(SmallConfig());
  const std::string cmd = std::string(CLIPGRAIN_CLI_BINARY) + " train --config " + cfg +
                          " --out " + Out("bin") + " --seeds 1 > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(Out("bin") + "/per_core@2.5/1/trajectory.csv"));
}

}  // namespace
}  // namespace clipgrain
