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

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "clipgrain/dataset.h"
#include "clipgrain/errors.h"
#include "clipgrain/trainer.h"

namespace clipgrain {
namespace {

std::vector<double> Ladder(size_t n) {
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i + 1);
  return v;
}

// E[log2 N - log2 R] for R uniform on {1..N}, via log-gamma.
double ExactRandomRankExposure(size_t n) {
  const double nd = static_cast<double>(n);
  return std::log2(nd) - std::lgamma(nd + 1) / std::log(2.0) / nd;
}

TEST(ExposureTest, KnownValues) {
  const std::vector<double> holdout = Ladder(1024);
  EXPECT_EQ(Exposure(0.5, holdout), 10.0);
  EXPECT_EQ(ExposureRank(511.5, holdout), 512);
  EXPECT_EQ(Exposure(511.5, holdout), 1.0);
  EXPECT_EQ(Exposure(5000, holdout), 0.0);
  EXPECT_EQ(ExposureRank(5000, holdout), 1024);
}

TEST(ExposureTest, TiesDoNotCountAsBetter) {
  const std::vector<double> holdout = Ladder(1024);
  EXPECT_EQ(Exposure(1.0, holdout), 10.0);
  EXPECT_EQ(ExposureRank(3.0, holdout), 3);
}

TEST(ExposureTest, NeedsTwoHoldoutExamples) {
  EXPECT_THROW(Exposure(0.0, std::vector<double>{1.0}), Error);
  EXPECT_THROW(Exposure(0.0, std::vector<double>{}), Error);
}

TEST(ExposureTest, BoundsAndMonotonicity) {
  SeededRng rng(3);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> holdout(2 + rng.UniformInt(100));
    for (double& s : holdout) s = rng.Normal();
    const double score = rng.Normal();
    const double e = Exposure(score, holdout);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, std::log2(static_cast<double>(holdout.size())));
    EXPECT_GE(Exposure(score - std::abs(rng.Normal()), holdout), e);
  }
}

TEST(ExposureTest, RandomRanksAverageNearOneOverLn2) {
  const double exact = ExactRandomRankExposure(1024);
  EXPECT_NEAR(exact, 1.0 / std::log(2.0), 0.01);
  SeededRng rng(21);
  std::vector<double> holdout(1024);
  constexpr int kDraws = 20000;
  double total = 0;
  for (int i = 0; i < kDraws; ++i) {
    for (double& s : holdout) s = rng.Uniform();
    total += Exposure(rng.Uniform(), holdout);
  }
  // The standard deviation of -log2 U is 1/ln 2; allow three standard errors.
  const double se = (1.0 / std::log(2.0)) / std::sqrt(kDraws);
  EXPECT_NEAR(total / kDraws, exact, 3 * se);
}

TEST(CanaryTest, MeanSitsAtOffsetVector) {
  SeededRng rng(5);
  CanaryOptions opts;
  opts.center = {1.0, -2.0, 0.0};
  opts.sigma = {0.5, 2.0, 1.0};
  opts.classes = 4;
  const auto canaries = GenerateCanaries(3, 1000, rng, opts);
  ASSERT_EQ(canaries.size(), 1000u);
  for (size_t i = 0; i < 3; ++i) {
    double mean = 0;
    for (const Example& c : canaries) mean += c.features[i];
    mean /= 1000;
    const double target = opts.center[i] + 5.0 * opts.sigma[i];
    EXPECT_NEAR(mean, target, 3 * opts.sigma[i] / std::sqrt(1000.0));
  }
  std::set<double> labels;
  for (const Example& c : canaries) {
    EXPECT_TRUE(c.is_canary);
    labels.insert(c.target);
  }
  EXPECT_EQ(labels, (std::set<double>{0, 1, 2, 3}));
}

TEST(CanaryTest, CohortSizeAndReproducibility) {
  CanaryOptions opts;
  opts.classes = 2;
  opts.first_id = 500;
  SeededRng a(8), b(8);
  const auto x = GenerateCanaries(4, 20, a, opts);
  const auto y = GenerateCanaries(4, 20, b, opts);
  ASSERT_EQ(x.size(), 20u);
  EXPECT_EQ(x.front().id, 500);
  EXPECT_EQ(x.back().id, 519);
  for (size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].features, y[i].features);
    EXPECT_EQ(x[i].target, y[i].target);
  }
}

TEST(RobustMomentsTest, MedianAndMad) {
  Dataset d;
  d.dim = 1;
  for (double v : {1.0, 2.0, 3.0, 4.0, 100.0}) {
    Example ex;
    ex.id = static_cast<int64_t>(d.examples.size());
    ex.features = {v};
    d.examples.push_back(ex);
  }
  RealVector median, scale;
  RobustFeatureMoments(d, median, scale);
  EXPECT_EQ(median[0], 3.0);
  EXPECT_DOUBLE_EQ(scale[0], kMadToSigma);
  RealVector mean, sd;
  FeatureMoments(d, mean, sd);
  EXPECT_DOUBLE_EQ(mean[0], 22.0);
}

std::vector<CanaryCohort> Cohorts(std::initializer_list<int64_t> counts,
                                  size_t per_cohort) {
  std::vector<CanaryCohort> cohorts;
  int64_t id = 1000;
  SeededRng rng(1);
  CanaryOptions opts;
  opts.classes = 3;
  for (int64_t k : counts) {
    CanaryCohort c;
    c.cohort_id = static_cast<int>(cohorts.size());
    c.insertion_count = k;
    opts.first_id = id;
    opts.cohort_id = c.cohort_id;
    c.canaries = GenerateCanaries(5, per_cohort, rng, opts);
    id += static_cast<int64_t>(per_cohort);
    cohorts.push_back(std::move(c));
  }
  return cohorts;
}

TEST(ScheduleTest, PlacementsAreDistinctAndInRange) {
  const auto cohorts = Cohorts({1, 2, 4, 8, 16}, 20);
  SeededRng rng(2);
  const CanarySchedule s = ScheduleCanaries(cohorts, 400, 32, rng);
  EXPECT_EQ(s.total_placements(), 20u * (1 + 2 + 4 + 8 + 16));
  std::map<int64_t, int64_t> per_canary;
  std::set<std::pair<int64_t, size_t>> seen;
  for (const auto& [step, placements] : s.placements()) {
    EXPECT_GE(step, 1);
    EXPECT_LE(step, 400);
    for (const auto& p : placements) {
      EXPECT_LT(p.slot, 32u);
      EXPECT_TRUE(seen.emplace(step, p.slot).second);
      ++per_canary[p.example.id];
    }
  }
  for (const auto& c : cohorts) {
    for (const Example& ex : c.canaries) {
      EXPECT_EQ(per_canary[ex.id], c.insertion_count);
    }
  }
}

TEST(ScheduleTest, RejectsOverfullSchedules) {
  const auto cohorts = Cohorts({16}, 20);
  SeededRng rng(2);
  EXPECT_THROW(ScheduleCanaries(cohorts, 10, 4, rng), Error);
}

TEST(ScheduleTest, TrainingSeesEachCanaryExactlyKTimes) {
  SyntheticSpec spec;
  spec.dim = 5;
  spec.classes = 3;
  spec.train_size = 100;
  spec.test_size = 10;
  const Dataset d = GenerateSynthetic(spec).train;
  const auto cohorts = Cohorts({1, 2, 4, 8, 16}, 4);
  SeededRng rng(7);
  const CanarySchedule s = ScheduleCanaries(cohorts, 300, 8, rng);
  TrainConfig cfg;
  cfg.iterations = 300;
  cfg.cores = 4;
  cfg.per_core_batch = 2;
  cfg.learning_rate = 0.01;
  std::map<int64_t, int64_t> observed;
  const TrainTrajectory t =
      Train(Model::Mlp(5, 4, 3), d, cfg, &s,
            [&](int64_t, std::span<const double>, std::span<const Example> mb,
                const StepResult&) {
              for (const Example& ex : mb) {
                if (ex.is_canary) ++observed[ex.id];
              }
            });
  for (const auto& c : cohorts) {
    for (const Example& ex : c.canaries) {
      EXPECT_EQ(observed[ex.id], c.insertion_count);
      EXPECT_EQ(t.canary_hits.at(ex.id), c.insertion_count);
    }
  }
}

TEST(GapTest, SameSetHasZeroGap) {
  SyntheticSpec spec;
  spec.dim = 3;
  spec.train_size = 30;
  spec.test_size = 5;
  const Dataset d = GenerateSynthetic(spec).train;
  const Model m = Model::LogisticRegression(3, 4);
  SeededRng rng(1);
  const GapMetrics g = GeneralizationGap(m, m.InitParams(rng), d, d);
  EXPECT_EQ(g.gap, 0.0);
  EXPECT_EQ(g.test_metric, g.train_metric);
}

TEST(GapTest, OverfitTwoPointsHasPositiveGap) {
  const Model m = Model::Mlp(4, 16, 2);
  SeededRng rng(12);
  auto draw = [&](int64_t id) {
    Example ex;
    ex.id = id;
    ex.features.resize(4);
    for (double& v : ex.features) v = rng.Normal();
    ex.target = static_cast<double>(rng.UniformInt(2));
    return ex;
  };
  int positive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Dataset train, test;
    train.dim = test.dim = 4;
    train.examples = {draw(0), draw(1)};
    for (int i = 0; i < 20; ++i) test.examples.push_back(draw(10 + i));
    TrainConfig cfg;
    cfg.iterations = 300;
    cfg.per_core_batch = 2;
    cfg.learning_rate = 0.5;
    cfg.sampling = SamplingMode::kFullBatch;
    cfg.seed = static_cast<uint64_t>(trial);
    const TrainTrajectory t = Train(m, train, cfg);
    if (GeneralizationGap(m, t.final_params, train, test).gap > 0) ++positive;
  }
  EXPECT_GE(positive, 95);
}

struct AuditFixture {
  TrainTestSplit data;
  Model model = Model::Mlp(6, 8, 3);
  TrainConfig train;
  SecretSharerConfig config;

  AuditFixture() {
    SyntheticSpec spec;
    spec.dim = 6;
    spec.classes = 3;
    spec.train_size = 120;
    spec.test_size = 60;
    spec.seed = 4;
    data = GenerateSynthetic(spec);
    train.iterations = 200;
    train.cores = 4;
    train.per_core_batch = 2;
    train.learning_rate = 0.05;
    config.canaries_per_cohort = 5;
    config.holdout_size = 64;
  }
};

TEST(SecretSharerTest, ReportShape) {
  AuditFixture f;
  const std::vector<ClippingPolicy> policies = {NoClipping{}, PerCoreClipping{2.5}};
  const std::vector<uint64_t> seeds = {1, 2};
  const ExposureReport r = RunSecretSharer(f.data.train, f.data.test, f.model, f.train,
                                           policies, f.config, seeds);
  EXPECT_EQ(r.policies, (std::vector<std::string>{"none", "per_core@2.5"}));
  EXPECT_EQ(r.cohorts, (std::vector<int64_t>{1, 2, 4, 8, 16}));
  // Per-seed rows plus one aggregate row per (policy, cohort).
  EXPECT_EQ(r.rows.size(), 2u * 5 * 2 + 2u * 5);
  for (const ExposureRow& row : r.rows) {
    EXPECT_GE(row.mean_exposure, 0.0);
    EXPECT_LE(row.mean_exposure, 6.0);
    EXPECT_EQ(row.num_canaries, row.seed ? 5u : 10u);
  }
  EXPECT_EQ(r.Aggregate("none", 16).num_canaries, 10u);

  std::ostringstream csv;
  WriteExposureCsv(r, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "policy,cohort_k,seed,mean_exposure,std_exposure,train_metric,"
            "test_metric,gap");
  EXPECT_NE(csv.str().find("none,16,all,"), std::string::npos);

  std::ostringstream table;
  WriteExposureTable(r, table);
  EXPECT_NE(table.str().find("Canary #Insertion"), std::string::npos);
  EXPECT_NE(table.str().find("per_core@2.5"), std::string::npos);
}

TEST(SecretSharerTest, Deterministic) {
  AuditFixture f;
  const std::vector<ClippingPolicy> policies = {AdaptivePerCoreClipping{}};
  const std::vector<uint64_t> seeds = {3};
  std::ostringstream a, b;
  WriteExposureCsv(RunSecretSharer(f.data.train, f.data.test, f.model, f.train,
                                   policies, f.config, seeds),
                   a);
  WriteExposureCsv(RunSecretSharer(f.data.train, f.data.test, f.model, f.train,
                                   policies, f.config, seeds, 2),
                   b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(SecretSharerTest, UntrainedModelGivesRandomRanks) {
  AuditFixture f;
  f.train.iterations = 0;
  f.config.canaries_per_cohort = 40;
  f.config.holdout_size = 1024;
  const std::vector<ClippingPolicy> policies = {NoClipping{}};
  const std::vector<uint64_t> seeds = {1};
  const ExposureReport r = RunSecretSharer(f.data.train, f.data.test, f.model, f.train,
                                           policies, f.config, seeds);
  double total = 0;
  for (int64_t k : r.cohorts) total += r.Aggregate("none", k).mean_exposure;
  EXPECT_NEAR(total / 5, 1.0 / std::log(2.0), 0.15);
}

TEST(SecretSharerTest, TrainingFailureNamesPolicy) {
  AuditFixture f;
  SyntheticSpec spec;
  spec.task = TaskKind::kRegression;
  spec.dim = 6;
  spec.train_size = 120;
  spec.test_size = 60;
  f.data = GenerateSynthetic(spec);
  f.model = Model::LinearRegression(6);
  f.train.learning_rate = 1e300;
  const std::vector<ClippingPolicy> policies = {NoClipping{}};
  const std::vector<uint64_t> seeds = {1};
  try {
    RunSecretSharer(f.data.train, f.data.test, f.model, f.train, policies, f.config,
                    seeds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTrainingAborted);
    EXPECT_NE(std::string(e.what()).find("policy none"), std::string::npos) << e.what();
  }
}

TEST(SecretSharerTest, ConfigValidation) {
  SecretSharerConfig c;
  EXPECT_NO_THROW(ValidateSecretSharerConfig(c));
  c.holdout_size = 1;
  EXPECT_THROW(ValidateSecretSharerConfig(c), Error);
  c = SecretSharerConfig{};
  c.cohorts = {};
  EXPECT_THROW(ValidateSecretSharerConfig(c), Error);
  c.cohorts = {0};
  EXPECT_THROW(ValidateSecretSharerConfig(c), Error);
}

TEST(StatsTest, MeanAndSampleStd) {
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_EQ(Mean(v), 5.0);
  EXPECT_DOUBLE_EQ(SampleStd(v), std::sqrt(32.0 / 7.0));
  EXPECT_EQ(SampleStd(std::vector<double>{3}), 0.0);
}

}  // namespace
}  // namespace clipgrain
