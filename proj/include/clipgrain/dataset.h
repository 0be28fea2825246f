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

#ifndef CLIPGRAIN_DATASET_H_
#define CLIPGRAIN_DATASET_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clipgrain/numerics.h"
#include "clipgrain/rng.h"

namespace clipgrain {

// One training or evaluation record. `target` holds the regression value for
// real-valued tasks and the class index for classification tasks.
struct Example {
  int64_t id = 0;
  RealVector features;
  double target = 0.0;
  bool is_canary = false;
  std::optional<int> cohort_id;

  int label() const { return static_cast<int>(target); }
};

struct Dataset {
  std::vector<Example> examples;
  size_t dim = 0;

  size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// Checks that ids are unique and every feature row has length `dim`.
// Throws kInvalidInput (or kDimensionMismatch for ragged rows).
void ValidateDataset(const Dataset& dataset);

// Text format, one example per line, tab-separated fields:
//
//   id <TAB> f0,f1,...,f{d-1} <TAB> target <TAB> is_canary <TAB> cohort_id
//
// is_canary is 0 or 1; cohort_id is an integer or "-" when absent. Blank lines
// and lines starting with '#' are ignored. Rows whose feature count differs
// from the first row are rejected.
Dataset ParseDataset(std::istream& in);
Dataset LoadDataset(const std::string& path);
void WriteDataset(const Dataset& dataset, std::ostream& out);
void SaveDataset(const Dataset& dataset, const std::string& path);

enum class TaskKind { kClassification, kRegression };

// Synthetic task generator. Clean examples come from an isotropic Gaussian
// mixture (classification: one unit-variance cluster per class, centers drawn
// on a sphere of radius `separation`; regression: standard normal features
// and a random linear teacher plus noise).
//
// A fraction `label_noise` of the training examples receive a uniformly random
// label. A fraction `outlier_fraction` of the training examples are outliers:
// features scaled by `outlier_scale` and a random label. The test set is
// always clean.
struct SyntheticSpec {
  TaskKind task = TaskKind::kClassification;
  size_t dim = 16;
  size_t classes = 4;
  size_t train_size = 512;
  size_t test_size = 1024;
  double separation = 2.0;
  double noise = 1.0;
  double label_noise = 0.0;
  double outlier_fraction = 0.0;
  double outlier_scale = 10.0;
  uint64_t seed = 0;
};

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// Train ids are 0..train_size-1 and test ids follow them, so the two sets are
// disjoint by id.
TrainTestSplit GenerateSynthetic(const SyntheticSpec& spec);

}  // namespace clipgrain

#endif  // CLIPGRAIN_DATASET_H_
