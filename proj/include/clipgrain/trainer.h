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

#ifndef CLIPGRAIN_TRAINER_H_
#define CLIPGRAIN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "clipgrain/clipping.h"
#include "clipgrain/dataset.h"
#include "clipgrain/model.h"
#include "clipgrain/numerics.h"
#include "clipgrain/rng.h"

namespace clipgrain {

enum class SamplingMode {
  // B*C examples drawn uniformly with replacement every step.
  kWithReplacement,
  // Every step uses the whole dataset in stored order; requires
  // B*C == dataset size. Gives plain full-batch gradient descent.
  kFullBatch,
};

struct TrainConfig {
  int64_t iterations = 100;
  size_t cores = 1;
  size_t per_core_batch = 1;
  double learning_rate = 0.1;
  ClippingPolicy policy = NoClipping{};
  uint64_t seed = 0;
  // Full-dataset loss is recorded every `eval_every` steps (and at step 0).
  int64_t eval_every = 100;
  SamplingMode sampling = SamplingMode::kWithReplacement;
  // Worker threads for per-core gradient evaluation. Results do not depend
  // on this value.
  size_t threads = 1;
};

// Throws kConfig on any invalid field, naming it.
void ValidateTrainConfig(const TrainConfig& config);

// Canary placements keyed by step (1-based). Each placement overwrites one
// slot of that step's minibatch.
class CanarySchedule {
 public:
  struct Placement {
    size_t slot = 0;
    Example example;
  };

  // Throws kContract if (step, slot) is already taken.
  void Add(int64_t step, size_t slot, Example example);

  const std::vector<Placement>* At(int64_t step) const;
  size_t total_placements() const { return total_; }
  const std::map<int64_t, std::vector<Placement>>& placements() const {
    return by_step_;
  }

 private:
  std::map<int64_t, std::vector<Placement>> by_step_;
  size_t total_ = 0;
};

// Draws B*C examples uniformly with replacement from `dataset`, then applies
// any placements scheduled for `step`. The number of RNG draws does not
// depend on the schedule.
std::vector<Example> SampleMinibatch(const Dataset& dataset, size_t per_core_batch,
                                     size_t cores, SeededRng& rng,
                                     const CanarySchedule* schedule = nullptr,
                                     int64_t step = 0);

// Shard c holds minibatch positions [B*c, B*(c+1)). Throws kInvalidInput when
// |minibatch| != B*C.
std::vector<std::span<const Example>> Shard(std::span<const Example> minibatch,
                                            size_t per_core_batch, size_t cores);

struct StepRecord {
  int64_t step = 0;
  // Mean loss of the minibatch at the pre-update parameters.
  double loss = 0.0;
  std::vector<double> core_norms;
  std::optional<double> applied_bound;
  double agg_grad_norm = 0.0;

  double min_core_norm() const;
  double max_core_norm() const;
};

struct StepResult {
  ParamVector params;
  StepRecord record;
  // Pre-clip per-core gradients and the summed post-clip gradient g_t.
  std::vector<PerCoreGradient> per_core;
  RealVector aggregated;
};

// One iteration of data-parallel SGD: per-core shard-mean gradients, the
// clipping policy, a sum over cores in core-index order, and
// w - r * g_t. Throws kTrainingAborted naming the core when a gradient is
// non-finite.
StepResult TrainStep(const Model& model, std::span<const double> w,
                     std::span<const Example> minibatch, const TrainConfig& config,
                     int64_t step = 1);

struct EvalSnapshot {
  int64_t step = 0;
  double dataset_loss = 0.0;
};

struct TrainTrajectory {
  ParamVector initial_params;
  ParamVector final_params;
  std::vector<StepRecord> steps;
  std::vector<EvalSnapshot> evals;
  // Number of times each canary id appeared in a sampled minibatch.
  std::map<int64_t, int64_t> canary_hits;
};

// Called after every step with the parameters the step started from.
using StepObserver = std::function<void(
    int64_t step, std::span<const double> w_before,
    std::span<const Example> minibatch, const StepResult& result)>;

// Runs config.iterations steps from model.InitParams(SeededRng(seed)).
// Deterministic in (config, dataset, schedule).
TrainTrajectory Train(const Model& model, const Dataset& dataset,
                      const TrainConfig& config,
                      const CanarySchedule* schedule = nullptr,
                      const StepObserver& observer = nullptr);

// Same loop from explicit starting parameters.
TrainTrajectory TrainFrom(const Model& model, const Dataset& dataset,
                          const TrainConfig& config, ParamVector initial,
                          const CanarySchedule* schedule = nullptr,
                          const StepObserver& observer = nullptr);

inline constexpr const char* kTrajectorySchema = "clipgrain-trajectory v1";

// CSV: a "# clipgrain-trajectory v1" line, then
// step,loss,min_core_norm,max_core_norm,applied_bound,agg_grad_norm.
// Reals use 17 significant digits; a missing bound is an empty field.
void WriteTrajectoryCsv(const TrainTrajectory& trajectory, std::ostream& out);

}  // namespace clipgrain

#endif  // CLIPGRAIN_TRAINER_H_
