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

#include "clipgrain/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <string>
#include <thread>

#include "clipgrain/errors.h"

namespace clipgrain {
namespace {

struct CoreOutput {
  PerCoreGradient gradient;
  std::vector<RealVector> per_example;
};

CoreOutput EvaluateCore(const Model& model, std::span<const double> w,
                        std::span<const Example> shard, size_t core,
                        bool need_per_example, int64_t step) {
  CoreOutput out;
  RealVector grad = model.BatchGradient(w, shard);
  if (!AllFinite(grad)) {
    throw Error(ErrorCode::kTrainingAborted,
                "non-finite gradient on core " + std::to_string(core) +
                    " at step " + std::to_string(step));
  }
  out.gradient = PerCoreGradient::Make(core, std::move(grad));
  if (need_per_example) {
    out.per_example.reserve(shard.size());
    for (const Example& ex : shard) {
      RealVector g = model.ExampleGradient(w, ex);
      if (!AllFinite(g)) {
        throw Error(ErrorCode::kTrainingAborted,
                    "non-finite per-example gradient on core " +
                        std::to_string(core) + " at step " +
                        std::to_string(step) + " (example " +
                        std::to_string(ex.id) + ")");
      }
      out.per_example.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace

void ValidateTrainConfig(const TrainConfig& config) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kConfig, "train." + field + ": " + why);
  };
  if (config.iterations < 0) fail("iterations", "must be >= 0");
  if (config.cores == 0) fail("cores", "must be >= 1");
  if (config.per_core_batch == 0) fail("per_core_batch", "must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    fail("learning_rate", "must be finite and > 0");
  }
  if (config.eval_every <= 0) fail("eval_every", "must be >= 1");
  if (config.threads == 0) fail("threads", "must be >= 1");
  try {
    ValidatePolicy(config.policy, config.per_core_batch);
  } catch (const Error& e) {
    fail("policy", e.what());
  }
}

void CanarySchedule::Add(int64_t step, size_t slot, Example example) {
  auto& at_step = by_step_[step];
  for (const Placement& p : at_step) {
    if (p.slot == slot) {
      throw Error(ErrorCode::kContract,
                  "canary slot " + std::to_string(slot) + " at step " +
                      std::to_string(step) + " already taken");
    }
  }
  at_step.push_back({slot, std::move(example)});
  ++total_;
}

const std::vector<CanarySchedule::Placement>* CanarySchedule::At(
    int64_t step) const {
  const auto it = by_step_.find(step);
  return it == by_step_.end() ? nullptr : &it->second;
}

std::vector<Example> SampleMinibatch(const Dataset& dataset,
                                     size_t per_core_batch, size_t cores,
                                     SeededRng& rng,
                                     const CanarySchedule* schedule,
                                     int64_t step) {
  if (dataset.empty()) {
    throw Error(ErrorCode::kInvalidInput, "SampleMinibatch: empty dataset");
  }
  const size_t total = per_core_batch * cores;
  std::vector<Example> batch;
  batch.reserve(total);
  for (size_t i = 0; i < total; ++i) {
    batch.push_back(dataset.examples[rng.UniformInt(dataset.size())]);
  }
  if (schedule != nullptr) {
    if (const auto* placements = schedule->At(step)) {
      for (const auto& p : *placements) {
        if (p.slot >= total) {
          throw Error(ErrorCode::kContract,
                      "canary slot " + std::to_string(p.slot) +
                          " outside minibatch of " + std::to_string(total));
        }
        batch[p.slot] = p.example;
      }
    }
  }
  return batch;
}

std::vector<std::span<const Example>> Shard(std::span<const Example> minibatch,
                                            size_t per_core_batch,
                                            size_t cores) {
  if (minibatch.size() != per_core_batch * cores) {
    throw Error(ErrorCode::kInvalidInput,
                "Shard: minibatch of " + std::to_string(minibatch.size()) +
                    " cannot form " + std::to_string(cores) + " shards of " +
                    std::to_string(per_core_batch));
  }
  std::vector<std::span<const Example>> shards;
  shards.reserve(cores);
  for (size_t c = 0; c < cores; ++c) {
    shards.push_back(minibatch.subspan(c * per_core_batch, per_core_batch));
  }
  return shards;
}

double StepRecord::min_core_norm() const {
  return core_norms.empty() ? 0.0
                            : *std::min_element(core_norms.begin(),
                                                core_norms.end());
}

double StepRecord::max_core_norm() const {
  return core_norms.empty() ? 0.0
                            : *std::max_element(core_norms.begin(),
                                                core_norms.end());
}

StepResult TrainStep(const Model& model, std::span<const double> w,
                     std::span<const Example> minibatch,
                     const TrainConfig& config, int64_t step) {
  const size_t cores = config.cores;
  const auto shards = Shard(minibatch, config.per_core_batch, cores);
  const bool need_per_example = NeedsPerExampleGradients(config.policy);

  std::vector<CoreOutput> outputs(cores);
  std::vector<std::exception_ptr> errors(cores);
  auto run_core = [&](size_t c) {
    try {
      outputs[c] =
          EvaluateCore(model, w, shards[c], c, need_per_example, step);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const size_t workers = std::min(config.threads, cores);
  if (workers <= 1) {
    for (size_t c = 0; c < cores; ++c) run_core(c);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (size_t c = t; c < cores; c += workers) run_core(c);
      });
    }
  }
  // Report the lowest failing core so diagnostics do not depend on timing.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  StepResult result;
  result.per_core.reserve(cores);
  PerExampleGradients per_example;
  for (CoreOutput& out : outputs) {
    result.per_core.push_back(std::move(out.gradient));
    if (need_per_example) per_example.push_back(std::move(out.per_example));
  }

  const ClippedGradientSet clipped = ApplyPolicy(
      config.policy, result.per_core, need_per_example ? &per_example : nullptr);

  result.aggregated.assign(w.size(), 0.0);
  for (const RealVector& g : clipped.grads) {
    for (size_t i = 0; i < g.size(); ++i) result.aggregated[i] += g[i];
  }
  result.params = Axpy(-config.learning_rate, result.aggregated, w);
  if (!AllFinite(result.params)) {
    throw Error(ErrorCode::kTrainingAborted,
                "parameters became non-finite at step " + std::to_string(step));
  }

  StepRecord& rec = result.record;
  rec.step = step;
  rec.loss = model.BatchLoss(w, minibatch);
  rec.core_norms.reserve(cores);
  for (const PerCoreGradient& g : result.per_core) rec.core_norms.push_back(g.norm);
  rec.applied_bound = clipped.applied_bound;
  rec.agg_grad_norm = L2Norm(result.aggregated);
  return result;
}

TrainTrajectory TrainFrom(const Model& model, const Dataset& dataset,
                          const TrainConfig& config, ParamVector initial,
                          const CanarySchedule* schedule,
                          const StepObserver& observer) {
  ValidateTrainConfig(config);
  if (dataset.empty()) {
    throw Error(ErrorCode::kInvalidInput, "Train: empty dataset");
  }
  if (initial.size() != model.num_params()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Train: initial parameters have wrong length");
  }
  if (config.sampling == SamplingMode::kFullBatch &&
      config.per_core_batch * config.cores != dataset.size()) {
    throw Error(ErrorCode::kConfig,
                "train.sampling: full_batch needs per_core_batch * cores == "
                "dataset size");
  }

  SeededRng sampler = SeededRng(config.seed).Split(1);
  TrainTrajectory traj;
  traj.initial_params = initial;
  ParamVector w = std::move(initial);
  traj.steps.reserve(static_cast<size_t>(config.iterations));
  traj.evals.push_back({0, model.BatchLoss(w, dataset.examples)});

  for (int64_t t = 1; t <= config.iterations; ++t) {
    std::vector<Example> minibatch;
    if (config.sampling == SamplingMode::kFullBatch) {
      minibatch = dataset.examples;
    } else {
      minibatch = SampleMinibatch(dataset, config.per_core_batch, config.cores,
                                  sampler, schedule, t);
    }
    for (const Example& ex : minibatch) {
      if (ex.is_canary) ++traj.canary_hits[ex.id];
    }
    StepResult result = TrainStep(model, w, minibatch, config, t);
    if (observer) observer(t, w, minibatch, result);
    w = std::move(result.params);
    traj.steps.push_back(std::move(result.record));
    if (t % config.eval_every == 0) {
      traj.evals.push_back({t, model.BatchLoss(w, dataset.examples)});
    }
  }
  traj.final_params = std::move(w);
  return traj;
}

TrainTrajectory Train(const Model& model, const Dataset& dataset,
                      const TrainConfig& config, const CanarySchedule* schedule,
                      const StepObserver& observer) {
  SeededRng init_rng = SeededRng(config.seed).Split(0);
  return TrainFrom(model, dataset, config, model.InitParams(init_rng), schedule,
                   observer);
}

void WriteTrajectoryCsv(const TrainTrajectory& trajectory, std::ostream& out) {
  out << "# " << kTrajectorySchema << "\n";
  out << "step,loss,min_core_norm,max_core_norm,applied_bound,agg_grad_norm\n";
  for (const StepRecord& r : trajectory.steps) {
    out << r.step << ',' << FormatReal(r.loss) << ','
        << FormatReal(r.min_core_norm()) << ',' << FormatReal(r.max_core_norm())
        << ',' << (r.applied_bound ? FormatReal(*r.applied_bound) : "") << ','
        << FormatReal(r.agg_grad_norm) << '\n';
  }
}

}  // namespace clipgrain
