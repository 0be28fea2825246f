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

#include "clipgrain/dataset.h"

#include <sstream>
#include <string>

#include "gtest/gtest.h"

#include "clipgrain/errors.h"

namespace clipgrain {
namespace {

ErrorCode ParseCode(const std::string& text) {
  std::istringstream in(text);
  try {
    ParseDataset(in);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse unexpectedly succeeded";
  return ErrorCode::kInvalidInput;
}

TEST(DatasetParseTest, ReadsFields) {
  std::istringstream in(
      "# header\n"
      "\n"
      "3\t1.5,-2,0\t1\t0\t-\n"
      "7\t0,0,1e-3\t2\t1\t4\n");
  const Dataset d = ParseDataset(in);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim, 3u);
  EXPECT_EQ(d.examples[0].id, 3);
  EXPECT_EQ(d.examples[0].features, (RealVector{1.5, -2, 0}));
  EXPECT_EQ(d.examples[0].target, 1.0);
  EXPECT_FALSE(d.examples[0].is_canary);
  EXPECT_FALSE(d.examples[0].cohort_id.has_value());
  EXPECT_TRUE(d.examples[1].is_canary);
  EXPECT_EQ(d.examples[1].cohort_id, 4);
  EXPECT_EQ(d.examples[1].features[2], 1e-3);
}

TEST(DatasetParseTest, RejectsRaggedRows) {
  EXPECT_EQ(ParseCode("0\t1,2\t0\t0\t-\n1\t1,2,3\t0\t0\t-\n"), ErrorCode::kParse);
}

TEST(DatasetParseTest, RejectsMalformedRecords) {
  EXPECT_EQ(ParseCode("0\t1,2\t0\t0\n"), ErrorCode::kParse);
  EXPECT_EQ(ParseCode("0\t1,x\t0\t0\t-\n"), ErrorCode::kParse);
  EXPECT_EQ(ParseCode("0\t1,nan\t0\t0\t-\n"), ErrorCode::kParse);
  EXPECT_EQ(ParseCode("0\t1,2\t0\t2\t-\n"), ErrorCode::kParse);
  EXPECT_EQ(ParseCode("0\t1,2\t0\t0\t-\n0\t3,4\t1\t0\t-\n"), ErrorCode::kParse);
  EXPECT_EQ(ParseCode("a\t1,2\t0\t0\t-\n"), ErrorCode::kParse);
}

TEST(DatasetParseTest, ErrorNamesLine) {
  std::istringstream in("# c\n0\t1,2\t0\t0\t-\n1\t1\t0\t0\t-\n");
  try {
    ParseDataset(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(DatasetRoundTripTest, WriteThenParseIsExact) {
  SyntheticSpec spec;
  spec.dim = 5;
  spec.train_size = 40;
  spec.test_size = 10;
  spec.outlier_fraction = 0.1;
  spec.seed = 3;
  Dataset d = GenerateSynthetic(spec).train;
  d.examples[2].is_canary = true;
  d.examples[2].cohort_id = 9;
  std::stringstream buf;
  WriteDataset(d, buf);
  const Dataset back = ParseDataset(buf);
  ASSERT_EQ(back.size(), d.size());
  EXPECT_EQ(back.dim, d.dim);
  for (size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.examples[i].id, d.examples[i].id);
    EXPECT_EQ(back.examples[i].features, d.examples[i].features);
    EXPECT_EQ(back.examples[i].target, d.examples[i].target);
    EXPECT_EQ(back.examples[i].is_canary, d.examples[i].is_canary);
    EXPECT_EQ(back.examples[i].cohort_id, d.examples[i].cohort_id);
  }
}

TEST(SyntheticTest, ShapesAndDeterminism) {
  SyntheticSpec spec;
  spec.dim = 6;
  spec.classes = 3;
  spec.train_size = 100;
  spec.test_size = 50;
  spec.seed = 17;
  const TrainTestSplit a = GenerateSynthetic(spec);
  const TrainTestSplit b = GenerateSynthetic(spec);
  ASSERT_EQ(a.train.size(), 100u);
  ASSERT_EQ(a.test.size(), 50u);
  EXPECT_EQ(a.test.examples.front().id, 100);
  for (size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train.examples[i].features, b.train.examples[i].features);
    EXPECT_GE(a.train.examples[i].target, 0);
    EXPECT_LT(a.train.examples[i].target, 3);
  }
  ValidateDataset(a.train);
  ValidateDataset(a.test);
}

TEST(SyntheticTest, RegressionTask) {
  SyntheticSpec spec;
  spec.task = TaskKind::kRegression;
  spec.dim = 3;
  spec.train_size = 20;
  spec.test_size = 5;
  const TrainTestSplit s = GenerateSynthetic(spec);
  EXPECT_EQ(s.train.dim, 3u);
}

TEST(SyntheticTest, RejectsBadSpecs) {
  SyntheticSpec spec;
  spec.classes = 1;
  EXPECT_THROW(GenerateSynthetic(spec), Error);
  spec.classes = 2;
  spec.label_noise = 0.7;
  spec.outlier_fraction = 0.5;
  EXPECT_THROW(GenerateSynthetic(spec), Error);
}

TEST(ValidateDatasetTest, CatchesDuplicatesAndDims) {
  Dataset d;
  d.dim = 2;
  d.examples.resize(2);
  d.examples[0].features = {1, 2};
  d.examples[1].features = {1, 2};
  EXPECT_THROW(ValidateDataset(d), Error);
  d.examples[1].id = 1;
  EXPECT_NO_THROW(ValidateDataset(d));
  d.examples[1].features = {1};
  EXPECT_THROW(ValidateDataset(d), Error);
}

}  // namespace
}  // namespace clipgrain
