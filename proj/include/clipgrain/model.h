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

#ifndef CLIPGRAIN_MODEL_H_
#define CLIPGRAIN_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include "clipgrain/dataset.h"
#include "clipgrain/numerics.h"
#include "clipgrain/rng.h"

namespace clipgrain {

enum class ModelKind { kLinearRegression, kLogisticRegression, kMlp };

std::string ModelKindName(ModelKind kind);
ModelKind ParseModelKind(const std::string& name);

// A named contiguous slice of the flat parameter vector.
struct ParamSegment {
  std::string name;
  size_t offset = 0;
  size_t size = 0;
  size_t fan_in = 0;
  bool is_bias = false;
};

// Differentiable toy models over a flat parameter vector.
//
//   LinearRegression:   pred = w.x + b, loss = 0.5 (pred - y)^2
//   LogisticRegression: softmax over `classes` logits, cross-entropy loss
//   Mlp:                x -> tanh(W1 x + b1) -> W2 h + b2 -> softmax
//
// Weight matrices are stored row-major with one row per output unit.
class Model {
 public:
  static Model LinearRegression(size_t dim);
  static Model LogisticRegression(size_t dim, size_t classes);
  static Model Mlp(size_t dim, size_t hidden, size_t classes);

  ModelKind kind() const { return kind_; }
  size_t dim() const { return dim_; }
  size_t hidden() const { return hidden_; }
  size_t classes() const { return classes_; }
  size_t num_params() const { return num_params_; }
  const std::vector<ParamSegment>& layout() const { return layout_; }
  bool is_classifier() const { return kind_ != ModelKind::kLinearRegression; }

  // Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  ParamVector InitParams(SeededRng& rng) const;

  // Per-example loss, always >= 0 and finite for finite inputs.
  double ExampleLoss(std::span<const double> w, const Example& ex) const;

  // Adds the gradient of ExampleLoss to `grad`.
  void AccumulateExampleGradient(std::span<const double> w, const Example& ex,
                                 std::span<double> grad) const;

  RealVector ExampleGradient(std::span<const double> w,
                             const Example& ex) const;

  // Mean of per-example gradients. Examples are accumulated in ascending id
  // order whatever the input order, so the result is invariant to
  // permutations of `batch` bit for bit. Throws kInvalidInput on an empty
  // batch.
  RealVector BatchGradient(std::span<const double> w,
                           std::span<const Example> batch) const;

  // Mean loss over `batch` (same accumulation order as BatchGradient).
  double BatchLoss(std::span<const double> w,
                   std::span<const Example> batch) const;

  // The metric used to rank examples for exposure. Lower means the model fits
  // the example better.
  double ExampleScore(std::span<const double> w, const Example& ex) const {
    return ExampleLoss(w, ex);
  }

  // Class logits (classifiers) or the single prediction (regression).
  RealVector Forward(std::span<const double> w, const Example& ex) const;

 private:
  Model(ModelKind kind, size_t dim, size_t hidden, size_t classes);

  void CheckShapes(std::span<const double> w, const Example& ex) const;

  ModelKind kind_;
  size_t dim_;
  size_t hidden_;
  size_t classes_;
  size_t num_params_ = 0;
  std::vector<ParamSegment> layout_;
};

}  // namespace clipgrain

#endif  // CLIPGRAIN_MODEL_H_
