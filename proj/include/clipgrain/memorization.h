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

#ifndef CLIPGRAIN_MEMORIZATION_H_
#define CLIPGRAIN_MEMORIZATION_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clipgrain/clipping.h"
#include "clipgrain/dataset.h"
#include "clipgrain/model.h"
#include "clipgrain/rng.h"
#include "clipgrain/trainer.h"

namespace clipgrain {

// Out-of-distribution canaries. Coordinate i is drawn as
//   center[i] + sigma[i] * (offset_sigmas + N(0, 1))
// where center/sigma describe the training features (empty means 0 and 1).
// Labels are uniform over `classes`; for regression (classes == 0) targets
// are uniform on [-target_scale, target_scale].
struct CanaryOptions {
  double offset_sigmas = 5.0;
  RealVector center;
  RealVector sigma;
  size_t classes = 2;
  double target_scale = 3.0;
  int64_t first_id = 0;
  bool mark_canary = true;
  std::optional<int> cohort_id;
};

std::vector<Example> GenerateCanaries(size_t dim, size_t count, SeededRng& rng,
                                      const CanaryOptions& options);

// Per-coordinate mean and standard deviation of the dataset features.
void FeatureMoments(const Dataset& dataset, RealVector& mean, RealVector& stddev);

// Consistent estimator of a Gaussian sigma from the median absolute deviation.
inline constexpr double kMadToSigma = 1.482602218505602;

// Per-coordinate median and MAD-based scale. Unlike FeatureMoments these
// ignore a minority of gross outliers, so canaries are placed relative to the
// bulk of the training distribution.
void RobustFeatureMoments(const Dataset& dataset, RealVector& median,
                          RealVector& scale);

// rank = 1 + |{i : holdout_scores[i] < canary_score}|, clamped to [1, N].
// Lower scores mean a better fit. Throws kInvalidInput when N < 2.
int64_t ExposureRank(double canary_score, std::span<const double> holdout_scores);

// log2(N) - log2(rank). Lies in [0, log2 N].
double Exposure(double canary_score, std::span<const double> holdout_scores);

struct CanaryCohort {
  int cohort_id = 0;
  int64_t insertion_count = 1;
  std::vector<Example> canaries;
};

// Gives every canary of every cohort `insertion_count` placements at
// uniformly random (step, slot) pairs with step in [1, iterations] and slot
// in [0, minibatch_size). No two placements share a (step, slot). Throws
// kConfig when the placements do not fit.
CanarySchedule ScheduleCanaries(std::span<const CanaryCohort> cohorts,
                                int64_t iterations, size_t minibatch_size,
                                SeededRng& rng);

struct GapMetrics {
  double train_metric = 0.0;
  double test_metric = 0.0;
  double gap = 0.0;
};

// Mean ExampleScore on each set; gap = test - train.
GapMetrics GeneralizationGap(const Model& model, std::span<const double> w,
                             const Dataset& train_set, const Dataset& test_set);

struct SecretSharerConfig {
  std::vector<int64_t> cohorts = {1, 2, 4, 8, 16};
  size_t canaries_per_cohort = 20;
  size_t holdout_size = 1024;
  double offset_sigmas = 5.0;
};

void ValidateSecretSharerConfig(const SecretSharerConfig& config);

struct ExposureRow {
  std::string policy;
  int64_t cohort_k = 0;
  // Absent on rows aggregated over all seeds.
  std::optional<uint64_t> seed;
  size_t num_canaries = 0;
  double mean_exposure = 0.0;
  double std_exposure = 0.0;
  double train_metric = 0.0;
  double test_metric = 0.0;
  double gap = 0.0;
};

struct ExposureReport {
  std::vector<std::string> policies;
  std::vector<int64_t> cohorts;
  size_t holdout_size = 0;
  // Per-seed rows in (seed, policy, cohort) order, followed by one aggregate
  // row per (policy, cohort).
  std::vector<ExposureRow> rows;

  const ExposureRow& Aggregate(const std::string& policy, int64_t k) const;
};

// The canary audit. For every seed: draws the cohorts and a holdout set from
// the canary distribution, schedules the canaries, trains once per policy on
// `base` plus the canaries, scores canaries and holdout with ExampleScore and
// reports per-cohort exposure. Also audits that every canary was seen exactly
// its cohort's number of times. Independent (seed, policy) runs are spread
// over `parallel` workers; the report does not depend on it.
ExposureReport RunSecretSharer(const Dataset& base, const Dataset& test,
                               const Model& model, const TrainConfig& train,
                               std::span<const ClippingPolicy> policies,
                               const SecretSharerConfig& config,
                               std::span<const uint64_t> seeds,
                               size_t parallel = 1);

// CSV columns: policy,cohort_k,seed,mean_exposure,std_exposure,train_metric,
// test_metric,gap. Aggregate rows carry seed "all".
void WriteExposureCsv(const ExposureReport& report, std::ostream& out);

// Policies as rows, insertion counts as columns, "mean ± std" cells.
void WriteExposureTable(const ExposureReport& report, std::ostream& out);

double Mean(std::span<const double> v);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double SampleStd(std::span<const double> v);

}  // namespace clipgrain

#endif  // CLIPGRAIN_MEMORIZATION_H_
