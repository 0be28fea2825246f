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

#include "clipgrain/memorization.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "clipgrain/errors.h"
#include "clipgrain/parallel.h"

namespace clipgrain {
namespace {

// Stream indices for the per-seed audit randomness.
constexpr uint64_t kCanaryStream = 101;
constexpr uint64_t kHoldoutStream = 102;
constexpr uint64_t kScheduleStream = 103;

struct RunResult {
  // Exposures of each cohort's canaries, indexed like config.cohorts.
  std::vector<std::vector<double>> exposures;
  GapMetrics metrics;
};

}  // namespace

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleStd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<Example> GenerateCanaries(size_t dim, size_t count, SeededRng& rng,
                                      const CanaryOptions& options) {
  if (count == 0) {
    throw Error(ErrorCode::kInvalidInput, "GenerateCanaries: count must be >= 1");
  }
  if ((!options.center.empty() && options.center.size() != dim) ||
      (!options.sigma.empty() && options.sigma.size() != dim)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "GenerateCanaries: center/sigma length differs from dim");
  }
  std::vector<Example> out;
  out.reserve(count);
  for (size_t n = 0; n < count; ++n) {
    Example ex;
    ex.id = options.first_id + static_cast<int64_t>(n);
    ex.features.resize(dim);
    for (size_t i = 0; i < dim; ++i) {
      const double center = options.center.empty() ? 0.0 : options.center[i];
      const double sigma = options.sigma.empty() ? 1.0 : options.sigma[i];
      ex.features[i] = center + sigma * (options.offset_sigmas + rng.Normal());
    }
    if (options.classes >= 2) {
      ex.target = static_cast<double>(rng.UniformInt(options.classes));
    } else {
      ex.target = rng.Uniform(-options.target_scale, options.target_scale);
    }
    ex.is_canary = options.mark_canary;
    ex.cohort_id = options.cohort_id;
    out.push_back(std::move(ex));
  }
  return out;
}

void FeatureMoments(const Dataset& dataset, RealVector& mean,
                    RealVector& stddev) {
  mean.assign(dataset.dim, 0.0);
  stddev.assign(dataset.dim, 0.0);
  if (dataset.empty()) return;
  const double n = static_cast<double>(dataset.size());
  for (const Example& ex : dataset.examples) {
    for (size_t i = 0; i < dataset.dim; ++i) mean[i] += ex.features[i];
  }
  for (double& m : mean) m /= n;
  for (const Example& ex : dataset.examples) {
    for (size_t i = 0; i < dataset.dim; ++i) {
      const double d = ex.features[i] - mean[i];
      stddev[i] += d * d;
    }
  }
  for (double& s : stddev) s = std::sqrt(s / n);
}

void RobustFeatureMoments(const Dataset& dataset, RealVector& median,
                          RealVector& scale) {
  median.assign(dataset.dim, 0.0);
  scale.assign(dataset.dim, 0.0);
  if (dataset.empty()) return;
  std::vector<double> column(dataset.size());
  auto median_of = [](std::vector<double>& v) {
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
  };
  for (size_t i = 0; i < dataset.dim; ++i) {
    for (size_t n = 0; n < dataset.size(); ++n) {
      column[n] = dataset.examples[n].features[i];
    }
    median[i] = median_of(column);
    for (double& v : column) v = std::abs(v - median[i]);
    scale[i] = kMadToSigma * median_of(column);
  }
}

int64_t ExposureRank(double canary_score,
                     std::span<const double> holdout_scores) {
  const auto n = static_cast<int64_t>(holdout_scores.size());
  if (n < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "exposure needs a holdout set of at least 2 examples");
  }
  int64_t better = 0;
  for (double s : holdout_scores) {
    if (s < canary_score) ++better;
  }
  return std::clamp<int64_t>(1 + better, 1, n);
}

double Exposure(double canary_score, std::span<const double> holdout_scores) {
  const int64_t rank = ExposureRank(canary_score, holdout_scores);
  const auto n = static_cast<double>(holdout_scores.size());
  return std::log2(n) - std::log2(static_cast<double>(rank));
}

CanarySchedule ScheduleCanaries(std::span<const CanaryCohort> cohorts,
                                int64_t iterations, size_t minibatch_size,
                                SeededRng& rng) {
  size_t needed = 0;
  for (const CanaryCohort& c : cohorts) {
    if (c.insertion_count < 1) {
      throw Error(ErrorCode::kConfig, "insertion counts must be >= 1");
    }
    needed += c.canaries.size() * static_cast<size_t>(c.insertion_count);
  }
  const size_t capacity = static_cast<size_t>(std::max<int64_t>(iterations, 0)) *
                          minibatch_size;
  // Keep the slot table sparse enough that rejection sampling stays cheap.
  if (needed > capacity / 2) {
    throw Error(ErrorCode::kConfig,
                std::to_string(needed) + " canary placements do not fit in " +
                    std::to_string(iterations) + " steps of " +
                    std::to_string(minibatch_size) + " examples");
  }
  CanarySchedule schedule;
  std::set<std::pair<int64_t, size_t>> taken;
  for (const CanaryCohort& cohort : cohorts) {
    for (const Example& canary : cohort.canaries) {
      for (int64_t k = 0; k < cohort.insertion_count; ++k) {
        int64_t step;
        size_t slot;
        do {
          step = 1 + static_cast<int64_t>(
                         rng.UniformInt(static_cast<uint64_t>(iterations)));
          slot = static_cast<size_t>(rng.UniformInt(minibatch_size));
        } while (!taken.emplace(step, slot).second);
        schedule.Add(step, slot, canary);
      }
    }
  }
  return schedule;
}

GapMetrics GeneralizationGap(const Model& model, std::span<const double> w,
                             const Dataset& train_set,
                             const Dataset& test_set) {
  if (train_set.empty() || test_set.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "GeneralizationGap: train and test sets must be non-empty");
  }
  auto mean_score = [&](const Dataset& d) {
    double total = 0.0;
    for (const Example& ex : d.examples) total += model.ExampleScore(w, ex);
    return total / static_cast<double>(d.size());
  };
  GapMetrics m;
  m.train_metric = mean_score(train_set);
  m.test_metric = mean_score(test_set);
  m.gap = m.test_metric - m.train_metric;
  return m;
}

void ValidateSecretSharerConfig(const SecretSharerConfig& config) {
  if (config.cohorts.empty()) {
    throw Error(ErrorCode::kConfig, "secret_sharer.cohorts: must be non-empty");
  }
  for (int64_t k : config.cohorts) {
    if (k < 1) {
      throw Error(ErrorCode::kConfig,
                  "secret_sharer.cohorts: insertion counts must be >= 1");
    }
  }
  if (config.canaries_per_cohort < 1) {
    throw Error(ErrorCode::kConfig,
                "secret_sharer.canaries_per_cohort: must be >= 1");
  }
  if (config.holdout_size < 2) {
    throw Error(ErrorCode::kConfig, "secret_sharer.holdout_size: must be >= 2");
  }
  if (!std::isfinite(config.offset_sigmas)) {
    throw Error(ErrorCode::kConfig, "secret_sharer.offset_sigmas: must be finite");
  }
}

const ExposureRow& ExposureReport::Aggregate(const std::string& policy,
                                             int64_t k) const {
  for (const ExposureRow& r : rows) {
    if (!r.seed && r.policy == policy && r.cohort_k == k) return r;
  }
  throw Error(ErrorCode::kInvalidInput,
              "no aggregate exposure row for " + policy + " k=" +
                  std::to_string(k));
}

ExposureReport RunSecretSharer(const Dataset& base, const Dataset& test,
                               const Model& model, const TrainConfig& train,
                               std::span<const ClippingPolicy> policies,
                               const SecretSharerConfig& config,
                               std::span<const uint64_t> seeds,
                               size_t parallel) {
  ValidateSecretSharerConfig(config);
  ValidateTrainConfig(train);
  if (policies.empty()) {
    throw Error(ErrorCode::kConfig, "policies: must be non-empty");
  }
  if (seeds.empty()) throw Error(ErrorCode::kConfig, "seeds: must be non-empty");
  if (base.empty() || test.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "secret sharer needs non-empty train and test sets");
  }

  int64_t next_id = 0;
  for (const Dataset* d : {&base, &test}) {
    for (const Example& ex : d->examples) next_id = std::max(next_id, ex.id + 1);
  }
  RealVector center, sigma;
  RobustFeatureMoments(base, center, sigma);
  for (double& s : sigma) {
    if (s == 0.0) s = 1.0;
  }

  struct SeedSetup {
    std::vector<CanaryCohort> cohorts;
    std::vector<Example> holdout;
    CanarySchedule schedule;
  };
  std::vector<SeedSetup> setups;
  setups.reserve(seeds.size());
  for (uint64_t seed : seeds) {
    SeededRng root(seed);
    SeededRng canary_rng = root.Split(kCanaryStream);
    SeededRng holdout_rng = root.Split(kHoldoutStream);
    SeededRng schedule_rng = root.Split(kScheduleStream);
    CanaryOptions opts;
    opts.offset_sigmas = config.offset_sigmas;
    opts.center = center;
    opts.sigma = sigma;
    opts.classes = model.is_classifier() ? model.classes() : 0;

    SeedSetup setup;
    int64_t id = next_id;
    for (size_t j = 0; j < config.cohorts.size(); ++j) {
      opts.first_id = id;
      opts.cohort_id = static_cast<int>(j);
      CanaryCohort cohort;
      cohort.cohort_id = static_cast<int>(j);
      cohort.insertion_count = config.cohorts[j];
      cohort.canaries =
          GenerateCanaries(base.dim, config.canaries_per_cohort, canary_rng, opts);
      id += static_cast<int64_t>(config.canaries_per_cohort);
      setup.cohorts.push_back(std::move(cohort));
    }
    opts.first_id = id;
    opts.cohort_id.reset();
    opts.mark_canary = false;
    setup.holdout =
        GenerateCanaries(base.dim, config.holdout_size, holdout_rng, opts);
    // An untrained run (no steps) scores canaries that were never inserted.
    if (train.iterations > 0) {
      setup.schedule =
          ScheduleCanaries(setup.cohorts, train.iterations,
                           train.per_core_batch * train.cores, schedule_rng);
    }
    setups.push_back(std::move(setup));
  }

  const size_t num_policies = policies.size();
  std::vector<RunResult> results(seeds.size() * num_policies);
  ParallelFor(results.size(), parallel, [&](size_t task) {
    const size_t s = task / num_policies;
    const size_t p = task % num_policies;
    const SeedSetup& setup = setups[s];
    TrainConfig cfg = train;
    cfg.policy = policies[p];
    cfg.seed = seeds[s];
    TrainTrajectory traj;
    try {
      traj = Train(model, base, cfg, &setup.schedule);
    } catch (const Error& e) {
      throw Error(e.code(), "policy " + PolicyTag(policies[p]) + ", seed " +
                                std::to_string(seeds[s]) + ": " + e.what());
    }
    const ParamVector& w = traj.final_params;

    std::vector<double> holdout_scores;
    holdout_scores.reserve(setup.holdout.size());
    for (const Example& ex : setup.holdout) {
      holdout_scores.push_back(model.ExampleScore(w, ex));
    }
    RunResult& out = results[task];
    for (const CanaryCohort& cohort : setup.cohorts) {
      std::vector<double> exposures;
      for (const Example& canary : cohort.canaries) {
        const auto it = traj.canary_hits.find(canary.id);
        const int64_t hits = it == traj.canary_hits.end() ? 0 : it->second;
        const int64_t expected = train.iterations > 0 ? cohort.insertion_count : 0;
        if (hits != expected) {
          throw Error(ErrorCode::kContract,
                      "canary " + std::to_string(canary.id) + " seen " +
                          std::to_string(hits) + " times, scheduled " +
                          std::to_string(expected));
        }
        exposures.push_back(Exposure(model.ExampleScore(w, canary), holdout_scores));
      }
      out.exposures.push_back(std::move(exposures));
    }
    out.metrics = GeneralizationGap(model, w, base, test);
  });

  ExposureReport report;
  report.cohorts = config.cohorts;
  report.holdout_size = config.holdout_size;
  for (const ClippingPolicy& p : policies) report.policies.push_back(PolicyTag(p));

  for (size_t s = 0; s < seeds.size(); ++s) {
    for (size_t p = 0; p < num_policies; ++p) {
      const RunResult& r = results[s * num_policies + p];
      for (size_t j = 0; j < config.cohorts.size(); ++j) {
        ExposureRow row;
        row.policy = report.policies[p];
        row.cohort_k = config.cohorts[j];
        row.seed = seeds[s];
        row.num_canaries = r.exposures[j].size();
        row.mean_exposure = Mean(r.exposures[j]);
        row.std_exposure = SampleStd(r.exposures[j]);
        row.train_metric = r.metrics.train_metric;
        row.test_metric = r.metrics.test_metric;
        row.gap = r.metrics.gap;
        report.rows.push_back(std::move(row));
      }
    }
  }
  for (size_t p = 0; p < num_policies; ++p) {
    for (size_t j = 0; j < config.cohorts.size(); ++j) {
      std::vector<double> all;
      std::vector<double> train_m, test_m, gap_m;
      for (size_t s = 0; s < seeds.size(); ++s) {
        const RunResult& r = results[s * num_policies + p];
        all.insert(all.end(), r.exposures[j].begin(), r.exposures[j].end());
        train_m.push_back(r.metrics.train_metric);
        test_m.push_back(r.metrics.test_metric);
        gap_m.push_back(r.metrics.gap);
      }
      ExposureRow row;
      row.policy = report.policies[p];
      row.cohort_k = config.cohorts[j];
      row.num_canaries = all.size();
      row.mean_exposure = Mean(all);
      row.std_exposure = SampleStd(all);
      row.train_metric = Mean(train_m);
      row.test_metric = Mean(test_m);
      row.gap = Mean(gap_m);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void WriteExposureCsv(const ExposureReport& report, std::ostream& out) {
  out << "policy,cohort_k,seed,mean_exposure,std_exposure,train_metric,"
         "test_metric,gap\n";
  for (const ExposureRow& r : report.rows) {
    out << r.policy << ',' << r.cohort_k << ','
        << (r.seed ? std::to_string(*r.seed) : std::string("all")) << ','
        << FormatReal(r.mean_exposure) << ',' << FormatReal(r.std_exposure)
        << ',' << FormatReal(r.train_metric) << ',' << FormatReal(r.test_metric)
        << ',' << FormatReal(r.gap) << '\n';
  }
}

void WriteExposureTable(const ExposureReport& report, std::ostream& out) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Canary #Insertion"};
  for (int64_t k : report.cohorts) header.push_back(std::to_string(k));
  cells.push_back(header);
  size_t per_cell = 0;
  for (const std::string& policy : report.policies) {
    std::vector<std::string> line = {policy};
    for (int64_t k : report.cohorts) {
      const ExposureRow& r = report.Aggregate(policy, k);
      per_cell = r.num_canaries;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", r.mean_exposure,
                    r.std_exposure);
      line.push_back(buf);
    }
    cells.push_back(std::move(line));
  }

  // Column widths in code points; the "±" sign is two bytes in UTF-8.
  auto width = [](const std::string& s) {
    size_t w = 0;
    for (unsigned char c : s) {
      if ((c & 0xC0) != 0x80) ++w;
    }
    return w;
  };
  std::vector<size_t> widths(header.size(), 0);
  for (const auto& line : cells) {
    for (size_t i = 0; i < line.size(); ++i) {
      widths[i] = std::max(widths[i], width(line[i]));
    }
  }
  auto emit = [&](const std::vector<std::string>& line) {
    for (size_t i = 0; i < line.size(); ++i) {
      if (i > 0) out << " | ";
      out << line[i] << std::string(widths[i] - width(line[i]), ' ');
    }
    out << '\n';
  };
  out << "Exposure by insertion count (mean ± std over " << per_cell
      << " canaries, holdout N=" << report.holdout_size << ")\n";
  emit(cells[0]);
  size_t total = 0;
  for (size_t w : widths) total += w;
  out << std::string(total + 3 * (widths.size() - 1), '-') << '\n';
  for (size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
}

}  // namespace clipgrain
