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

#ifndef CLIPGRAIN_EXPERIMENT_H_
#define CLIPGRAIN_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "clipgrain/clipping.h"
#include "clipgrain/dataset.h"
#include "clipgrain/memorization.h"
#include "clipgrain/model.h"
#include "clipgrain/trainer.h"

namespace clipgrain {

struct ModelSpec {
  ModelKind kind = ModelKind::kMlp;
  size_t hidden = 32;
  size_t classes = 2;
};

Model BuildModel(const ModelSpec& spec, size_t dim);

// Either both paths, or a synthetic generator.
struct DataSpec {
  std::string train_path;
  std::string test_path;
  std::optional<SyntheticSpec> synthetic;
};

struct GradcheckSpec {
  size_t draws = 100;
  double tolerance = 1e-5;
  double eps = kDefaultFiniteDiffEps;
  size_t max_batch = 8;
};

// Everything one invocation needs. Parsed from a JSON document; every
// section and key is optional and falls back to the defaults below.
struct ExperimentConfig {
  ModelSpec model;
  DataSpec data;
  TrainConfig train;
  std::vector<ClippingPolicy> policies = {NoClipping{}};
  SecretSharerConfig secret_sharer;
  std::vector<double> sweep_bounds = {1.0, 2.5, 5.0, 10.0, 100.0};
  GradcheckSpec gradcheck;
  std::vector<uint64_t> seeds = {1};
  std::string output_dir = "out";
  size_t parallel = 1;
};

// Throws kConfig with the JSON path of the offending field, e.g.
// "train.learning_rate: must be finite and > 0". Unknown keys are rejected.
ExperimentConfig ParseExperimentConfig(const nlohmann::json& doc);
ExperimentConfig LoadExperimentConfig(const std::string& path);

// The resolved configuration, as written to manifests. Parsing the result
// gives back an equivalent config.
nlohmann::json ConfigToJson(const ExperimentConfig& config);

// Full validation, run before any training starts.
// Checks every field up front. `needs_data` is false for commands that never
// touch a dataset (gradcheck).
void ValidateExperimentConfig(const ExperimentConfig& config,
                              bool needs_data = true);

ClippingPolicy ParsePolicy(const nlohmann::json& doc, const std::string& path);
nlohmann::json PolicyToJson(const ClippingPolicy& policy);

// Loads or generates the train/test split and checks it against the model.
TrainTestSplit LoadData(const ExperimentConfig& config);

std::vector<uint64_t> ParseSeedList(const std::string& text);

// ---- Bound sweep ----

struct SweepRun {
  std::string policy;
  std::optional<double> bound;
  uint64_t seed = 0;
  GapMetrics metrics;
};

struct SweepSummary {
  std::string policy;
  std::optional<double> bound;
  double mean_train_metric = 0.0;
  double mean_test_metric = 0.0;
  double mean_gap = 0.0;
  // 1 = lowest mean test metric, over baseline and clipped runs together.
  size_t rank = 0;
  bool selected = false;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<SweepSummary> summary;
  // The clipped bound with the lowest mean test metric; ties go to the
  // smaller bound.
  double selected_bound = 0.0;
};

// Trains a NoClipping baseline and PerCore(b) for every b, once per seed,
// and ranks them by final test metric.
SweepResult RunBoundSweep(const Model& model, const TrainTestSplit& data,
                          const TrainConfig& train, std::span<const double> bounds,
                          std::span<const uint64_t> seeds, size_t parallel = 1);

void WriteSweepRunsCsv(const SweepResult& result, std::ostream& out);
void WriteSweepSummaryCsv(const SweepResult& result, std::ostream& out);

// ---- Gradient check ----

using GradientFunction = std::function<RealVector(
    const Model&, std::span<const double>, std::span<const Example>)>;

struct GradcheckRow {
  std::string model;
  size_t draws = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

// For every model kind, compares `gradient` (Model::BatchGradient when
// empty) against central finite differences of the mean batch loss at
// spec.draws random (w, batch) pairs.
std::vector<GradcheckRow> RunGradcheck(const GradcheckSpec& spec, uint64_t seed,
                                       const GradientFunction& gradient = nullptr);

void WriteGradcheckCsv(std::span<const GradcheckRow> rows, std::ostream& out);

}  // namespace clipgrain

#endif  // CLIPGRAIN_EXPERIMENT_H_
