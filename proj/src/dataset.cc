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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_set>

#include "clipgrain/errors.h"

namespace clipgrain {
namespace {

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\r' || c == '\n' || c == '\t';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void ParseFail(size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kParse,
              "dataset line " + std::to_string(line_no) + ": " + what);
}

double ParseDouble(std::string_view s, size_t line_no, const char* field) {
  s = Trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    ParseFail(line_no, std::string("malformed ") + field + " '" +
                           std::string(s) + "'");
  }
  if (!std::isfinite(value)) {
    ParseFail(line_no, std::string("non-finite ") + field);
  }
  return value;
}

int64_t ParseInt(std::string_view s, size_t line_no, const char* field) {
  s = Trim(s);
  int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    ParseFail(line_no, std::string("malformed ") + field + " '" +
                           std::string(s) + "'");
  }
  return value;
}

}  // namespace

void ValidateDataset(const Dataset& dataset) {
  std::unordered_set<int64_t> ids;
  for (const Example& ex : dataset.examples) {
    if (ex.features.size() != dataset.dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "example " + std::to_string(ex.id) + " has " +
                      std::to_string(ex.features.size()) +
                      " features, dataset dim is " +
                      std::to_string(dataset.dim));
    }
    if (!ids.insert(ex.id).second) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate example id " + std::to_string(ex.id));
    }
    RequireFinite(ex.features, "example features");
  }
}

Dataset ParseDataset(std::istream& in) {
  Dataset dataset;
  std::unordered_set<int64_t> ids;
  bool have_dim = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = Split(view, '\t');
    if (fields.size() != 5) {
      ParseFail(line_no, "expected 5 tab-separated fields, got " +
                             std::to_string(fields.size()));
    }
    Example ex;
    ex.id = ParseInt(fields[0], line_no, "id");
    for (std::string_view f : Split(fields[1], ',')) {
      ex.features.push_back(ParseDouble(f, line_no, "feature"));
    }
    ex.target = ParseDouble(fields[2], line_no, "target");
    const int64_t canary = ParseInt(fields[3], line_no, "is_canary");
    if (canary != 0 && canary != 1) ParseFail(line_no, "is_canary must be 0/1");
    ex.is_canary = canary == 1;
    const std::string_view cohort = Trim(fields[4]);
    if (cohort != "-") {
      ex.cohort_id = static_cast<int>(ParseInt(cohort, line_no, "cohort_id"));
    }

    if (!have_dim) {
      dataset.dim = ex.features.size();
      have_dim = true;
    } else if (ex.features.size() != dataset.dim) {
      ParseFail(line_no, "ragged row: " + std::to_string(ex.features.size()) +
                             " features, expected " +
                             std::to_string(dataset.dim));
    }
    if (!ids.insert(ex.id).second) {
      ParseFail(line_no, "duplicate id " + std::to_string(ex.id));
    }
    dataset.examples.push_back(std::move(ex));
  }
  return dataset;
}

Dataset LoadDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset '" + path + "'");
  return ParseDataset(in);
}

void WriteDataset(const Dataset& dataset, std::ostream& out) {
  out << "# id\tfeatures\ttarget\tis_canary\tcohort_id\n";
  for (const Example& ex : dataset.examples) {
    out << ex.id << '\t';
    for (size_t i = 0; i < ex.features.size(); ++i) {
      if (i > 0) out << ',';
      out << FormatReal(ex.features[i]);
    }
    out << '\t' << FormatReal(ex.target) << '\t' << (ex.is_canary ? 1 : 0)
        << '\t';
    if (ex.cohort_id) {
      out << *ex.cohort_id;
    } else {
      out << '-';
    }
    out << '\n';
  }
}

void SaveDataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write dataset '" + path + "'");
  WriteDataset(dataset, out);
}

TrainTestSplit GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.dim == 0 || spec.train_size == 0 || spec.test_size == 0) {
    throw Error(ErrorCode::kConfig,
                "synthetic data needs dim, train_size, test_size >= 1");
  }
  const bool classification = spec.task == TaskKind::kClassification;
  if (classification && spec.classes < 2) {
    throw Error(ErrorCode::kConfig, "synthetic classification needs >= 2 classes");
  }
  if (spec.label_noise < 0 || spec.outlier_fraction < 0 ||
      spec.label_noise + spec.outlier_fraction > 1) {
    throw Error(ErrorCode::kConfig, "noise fractions must lie in [0, 1]");
  }

  SeededRng root(spec.seed);
  SeededRng structure_rng = root.Split(0);
  SeededRng train_rng = root.Split(1);
  SeededRng test_rng = root.Split(2);

  // Class centers (classification) or the linear teacher (regression).
  std::vector<RealVector> centers;
  RealVector teacher;
  if (classification) {
    for (size_t k = 0; k < spec.classes; ++k) {
      RealVector c(spec.dim);
      for (double& v : c) v = structure_rng.Normal();
      const double n = L2Norm(c);
      for (double& v : c) v *= spec.separation / n;
      centers.push_back(std::move(c));
    }
  } else {
    teacher.resize(spec.dim);
    const double s = 1.0 / std::sqrt(static_cast<double>(spec.dim));
    for (double& v : teacher) v = s * structure_rng.Normal();
  }

  auto draw = [&](SeededRng& rng, int64_t id, bool allow_corruption) {
    Example ex;
    ex.id = id;
    ex.features.resize(spec.dim);
    if (classification) {
      const size_t k = rng.UniformInt(spec.classes);
      for (size_t i = 0; i < spec.dim; ++i) {
        ex.features[i] = centers[k][i] + spec.noise * rng.Normal();
      }
      ex.target = static_cast<double>(k);
    } else {
      for (double& v : ex.features) v = rng.Normal();
      ex.target = Dot(teacher, ex.features) + spec.noise * rng.Normal();
    }
    if (!allow_corruption) return ex;
    const double u = rng.Uniform();
    const bool outlier = u < spec.outlier_fraction;
    const bool relabel = !outlier && u < spec.outlier_fraction + spec.label_noise;
    if (outlier) {
      for (double& v : ex.features) v *= spec.outlier_scale;
    }
    if (outlier || relabel) {
      ex.target = classification
                      ? static_cast<double>(rng.UniformInt(spec.classes))
                      : spec.outlier_scale * rng.Normal();
    }
    return ex;
  };

  TrainTestSplit split;
  split.train.dim = spec.dim;
  split.test.dim = spec.dim;
  for (size_t i = 0; i < spec.train_size; ++i) {
    split.train.examples.push_back(
        draw(train_rng, static_cast<int64_t>(i), true));
  }
  for (size_t i = 0; i < spec.test_size; ++i) {
    split.test.examples.push_back(
        draw(test_rng, static_cast<int64_t>(spec.train_size + i), false));
  }
  return split;
}

}  // namespace clipgrain
