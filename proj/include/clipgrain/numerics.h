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

#ifndef CLIPGRAIN_NUMERICS_H_
#define CLIPGRAIN_NUMERICS_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace clipgrain {

// All arithmetic in the library is carried out in binary64.
using RealVector = std::vector<double>;
using ParamVector = RealVector;

// Throws kInvalidInput if any entry is NaN or infinite. `what` names the
// offending quantity in the diagnostic.
void RequireFinite(std::span<const double> v, const char* what);

bool AllFinite(std::span<const double> v);

// Euclidean norm. Falls back to a rescaled accumulation when the plain sum of
// squares overflows or underflows, so the result is finite for every finite
// input.
double L2Norm(std::span<const double> v);

// a * x + y, element-wise.
RealVector Axpy(double a, std::span<const double> x, std::span<const double> y);

RealVector Scale(double a, std::span<const double> x);

double Dot(std::span<const double> x, std::span<const double> y);

// Cosine similarity; 0 when either vector is zero.
double CosineSimilarity(std::span<const double> x, std::span<const double> y);

using LossFunction = std::function<double(std::span<const double>)>;

inline constexpr double kDefaultFiniteDiffEps = 1e-5;

// Central-difference gradient of `loss` at `w`:
//   (loss(w + eps e_i) - loss(w - eps e_i)) / (2 eps)
// Throws kOracleFailure if any loss evaluation is non-finite.
RealVector FiniteDiffGradient(const LossFunction& loss,
                              std::span<const double> w,
                              double eps = kDefaultFiniteDiffEps);

// ||a - b|| / max(||a||, ||b||), with 0/0 taken as 0. Used to compare analytic
// and finite-difference gradients.
double RelativeError(std::span<const double> a, std::span<const double> b);

// 17 significant digits, enough to round-trip any double.
std::string FormatReal(double v);

}  // namespace clipgrain

#endif  // CLIPGRAIN_NUMERICS_H_
