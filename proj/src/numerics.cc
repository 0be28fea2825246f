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

#include "clipgrain/numerics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "clipgrain/errors.h"

namespace clipgrain {

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

void RequireFinite(std::span<const double> v, const char* what) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::kInvalidInput,
                  std::string(what) + ": non-finite entry at index " +
                      std::to_string(i));
    }
  }
}

double L2Norm(std::span<const double> v) {
  RequireFinite(v, "L2Norm");
  double sum_sq = 0.0;
  for (double x : v) sum_sq += x * x;
  const bool overflow = std::isinf(sum_sq);
  const bool underflow = sum_sq < std::numeric_limits<double>::min();
  if (!overflow && !underflow) return std::sqrt(sum_sq);

  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double scaled_sum = 0.0;
  for (double x : v) {
    const double r = x / scale;
    scaled_sum += r * r;
  }
  return scale * std::sqrt(scaled_sum);
}

RealVector Axpy(double a, std::span<const double> x,
                std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Axpy: length " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  RealVector out(y.begin(), y.end());
  for (size_t i = 0; i < out.size(); ++i) out[i] += a * x[i];
  return out;
}

RealVector Scale(double a, std::span<const double> x) {
  RealVector out(x.begin(), x.end());
  for (double& v : out) v *= a;
  return out;
}

double Dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Dot: length " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double CosineSimilarity(std::span<const double> x, std::span<const double> y) {
  const double nx = L2Norm(x);
  const double ny = L2Norm(y);
  if (nx == 0.0 || ny == 0.0) return 0.0;
  // Normalize first so the dot product cannot overflow.
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += (x[i] / nx) * (y[i] / ny);
  return acc;
}

RealVector FiniteDiffGradient(const LossFunction& loss,
                              std::span<const double> w, double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "FiniteDiffGradient: eps must be > 0");
  }
  RealVector probe(w.begin(), w.end());
  RealVector grad(w.size());
  for (size_t i = 0; i < w.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double up = loss(probe);
    probe[i] = saved - eps;
    const double down = loss(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::kOracleFailure,
                  "FiniteDiffGradient: non-finite loss at coordinate " +
                      std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double RelativeError(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "RelativeError: length mismatch");
  }
  RealVector diff(a.size());
  for (size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double denom = std::max(L2Norm(a), L2Norm(b));
  if (denom == 0.0) return 0.0;
  return L2Norm(diff) / denom;
}

}  // namespace clipgrain
