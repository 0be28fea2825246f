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

#include "clipgrain/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clipgrain/errors.h"

namespace clipgrain {
namespace {

// log(sum(exp(z))) without overflow.
double LogSumExp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

// Cross-entropy of `logits` against class `label`; writes softmax
// probabilities into `probs` when non-empty.
double SoftmaxCrossEntropy(std::span<const double> logits, int label,
                           std::span<double> probs) {
  const double lse = LogSumExp(logits);
  if (!probs.empty()) {
    for (size_t k = 0; k < logits.size(); ++k) {
      probs[k] = std::exp(logits[k] - lse);
    }
  }
  return std::max(0.0, lse - logits[static_cast<size_t>(label)]);
}

std::vector<size_t> IdOrder(std::span<const Example> batch) {
  std::vector<size_t> order(batch.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return batch[a].id < batch[b].id;
  });
  return order;
}

}  // namespace

std::string ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinearRegression:
      return "linear_regression";
    case ModelKind::kLogisticRegression:
      return "logistic_regression";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "linear_regression") return ModelKind::kLinearRegression;
  if (name == "logistic_regression") return ModelKind::kLogisticRegression;
  if (name == "mlp") return ModelKind::kMlp;
  throw Error(ErrorCode::kConfig, "unknown model kind '" + name + "'");
}

Model::Model(ModelKind kind, size_t dim, size_t hidden, size_t classes)
    : kind_(kind), dim_(dim), hidden_(hidden), classes_(classes) {
  if (dim == 0) throw Error(ErrorCode::kConfig, "model dim must be >= 1");
  auto add = [this](std::string name, size_t size, size_t fan_in,
                    bool is_bias) {
    layout_.push_back({std::move(name), num_params_, size, fan_in, is_bias});
    num_params_ += size;
  };
  switch (kind) {
    case ModelKind::kLinearRegression:
      add("weights", dim, dim, false);
      add("bias", 1, dim, true);
      break;
    case ModelKind::kLogisticRegression:
      if (classes < 2) throw Error(ErrorCode::kConfig, "classes must be >= 2");
      add("weights", classes * dim, dim, false);
      add("bias", classes, dim, true);
      break;
    case ModelKind::kMlp:
      if (classes < 2) throw Error(ErrorCode::kConfig, "classes must be >= 2");
      if (hidden == 0) throw Error(ErrorCode::kConfig, "hidden must be >= 1");
      add("hidden_weights", hidden * dim, dim, false);
      add("hidden_bias", hidden, dim, true);
      add("output_weights", classes * hidden, hidden, false);
      add("output_bias", classes, hidden, true);
      break;
  }
}

Model Model::LinearRegression(size_t dim) {
  return Model(ModelKind::kLinearRegression, dim, 0, 0);
}

Model Model::LogisticRegression(size_t dim, size_t classes) {
  return Model(ModelKind::kLogisticRegression, dim, 0, classes);
}

Model Model::Mlp(size_t dim, size_t hidden, size_t classes) {
  return Model(ModelKind::kMlp, dim, hidden, classes);
}

ParamVector Model::InitParams(SeededRng& rng) const {
  ParamVector w(num_params_, 0.0);
  for (const ParamSegment& seg : layout_) {
    if (seg.is_bias) continue;
    const double limit = 1.0 / std::sqrt(static_cast<double>(seg.fan_in));
    for (size_t i = 0; i < seg.size; ++i) {
      w[seg.offset + i] = rng.Uniform(-limit, limit);
    }
  }
  return w;
}

void Model::CheckShapes(std::span<const double> w, const Example& ex) const {
  if (w.size() != num_params_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "parameter vector has length " + std::to_string(w.size()) +
                    ", model expects " + std::to_string(num_params_));
  }
  if (ex.features.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "example " + std::to_string(ex.id) + " has " +
                    std::to_string(ex.features.size()) +
                    " features, model expects " + std::to_string(dim_));
  }
  if (is_classifier()) {
    const double t = ex.target;
    if (t != std::floor(t) || t < 0 || t >= static_cast<double>(classes_)) {
      throw Error(ErrorCode::kInvalidInput,
                  "example " + std::to_string(ex.id) +
                      " has invalid class index " + std::to_string(t));
    }
  }
}

RealVector Model::Forward(std::span<const double> w, const Example& ex) const {
  CheckShapes(w, ex);
  const auto& x = ex.features;
  switch (kind_) {
    case ModelKind::kLinearRegression: {
      double pred = w[dim_];
      for (size_t i = 0; i < dim_; ++i) pred += w[i] * x[i];
      return {pred};
    }
    case ModelKind::kLogisticRegression: {
      const double* weights = w.data();
      const double* bias = w.data() + classes_ * dim_;
      RealVector z(classes_);
      for (size_t k = 0; k < classes_; ++k) {
        double acc = bias[k];
        for (size_t i = 0; i < dim_; ++i) acc += weights[k * dim_ + i] * x[i];
        z[k] = acc;
      }
      return z;
    }
    case ModelKind::kMlp: {
      const double* w1 = w.data() + layout_[0].offset;
      const double* b1 = w.data() + layout_[1].offset;
      const double* w2 = w.data() + layout_[2].offset;
      const double* b2 = w.data() + layout_[3].offset;
      RealVector h(hidden_);
      for (size_t j = 0; j < hidden_; ++j) {
        double acc = b1[j];
        for (size_t i = 0; i < dim_; ++i) acc += w1[j * dim_ + i] * x[i];
        h[j] = std::tanh(acc);
      }
      RealVector z(classes_);
      for (size_t k = 0; k < classes_; ++k) {
        double acc = b2[k];
        for (size_t j = 0; j < hidden_; ++j) acc += w2[k * hidden_ + j] * h[j];
        z[k] = acc;
      }
      return z;
    }
  }
  return {};
}

double Model::ExampleLoss(std::span<const double> w, const Example& ex) const {
  const RealVector out = Forward(w, ex);
  if (kind_ == ModelKind::kLinearRegression) {
    const double r = out[0] - ex.target;
    return 0.5 * r * r;
  }
  return SoftmaxCrossEntropy(out, ex.label(), {});
}

void Model::AccumulateExampleGradient(std::span<const double> w,
                                      const Example& ex,
                                      std::span<double> grad) const {
  CheckShapes(w, ex);
  if (grad.size() != num_params_) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient buffer length");
  }
  const auto& x = ex.features;
  switch (kind_) {
    case ModelKind::kLinearRegression: {
      double pred = w[dim_];
      for (size_t i = 0; i < dim_; ++i) pred += w[i] * x[i];
      const double r = pred - ex.target;
      for (size_t i = 0; i < dim_; ++i) grad[i] += r * x[i];
      grad[dim_] += r;
      return;
    }
    case ModelKind::kLogisticRegression: {
      const RealVector z = Forward(w, ex);
      RealVector p(classes_);
      SoftmaxCrossEntropy(z, ex.label(), p);
      p[static_cast<size_t>(ex.label())] -= 1.0;
      double* gw = grad.data();
      double* gb = grad.data() + classes_ * dim_;
      for (size_t k = 0; k < classes_; ++k) {
        for (size_t i = 0; i < dim_; ++i) gw[k * dim_ + i] += p[k] * x[i];
        gb[k] += p[k];
      }
      return;
    }
    case ModelKind::kMlp: {
      const double* w1 = w.data() + layout_[0].offset;
      const double* b1 = w.data() + layout_[1].offset;
      const double* w2 = w.data() + layout_[2].offset;
      const double* b2 = w.data() + layout_[3].offset;
      RealVector h(hidden_);
      for (size_t j = 0; j < hidden_; ++j) {
        double acc = b1[j];
        for (size_t i = 0; i < dim_; ++i) acc += w1[j * dim_ + i] * x[i];
        h[j] = std::tanh(acc);
      }
      RealVector dz(classes_);
      for (size_t k = 0; k < classes_; ++k) {
        double acc = b2[k];
        for (size_t j = 0; j < hidden_; ++j) acc += w2[k * hidden_ + j] * h[j];
        dz[k] = acc;
      }
      RealVector logits = dz;
      SoftmaxCrossEntropy(logits, ex.label(), dz);
      dz[static_cast<size_t>(ex.label())] -= 1.0;

      double* g_w1 = grad.data() + layout_[0].offset;
      double* g_b1 = grad.data() + layout_[1].offset;
      double* g_w2 = grad.data() + layout_[2].offset;
      double* g_b2 = grad.data() + layout_[3].offset;
      RealVector dpre(hidden_, 0.0);
      for (size_t k = 0; k < classes_; ++k) {
        for (size_t j = 0; j < hidden_; ++j) {
          g_w2[k * hidden_ + j] += dz[k] * h[j];
          dpre[j] += w2[k * hidden_ + j] * dz[k];
        }
        g_b2[k] += dz[k];
      }
      for (size_t j = 0; j < hidden_; ++j) {
        const double d = dpre[j] * (1.0 - h[j] * h[j]);
        for (size_t i = 0; i < dim_; ++i) g_w1[j * dim_ + i] += d * x[i];
        g_b1[j] += d;
      }
      return;
    }
  }
}

RealVector Model::ExampleGradient(std::span<const double> w,
                                  const Example& ex) const {
  RealVector grad(num_params_, 0.0);
  AccumulateExampleGradient(w, ex, grad);
  return grad;
}

RealVector Model::BatchGradient(std::span<const double> w,
                                std::span<const Example> batch) const {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidInput, "BatchGradient: empty batch");
  }
  RealVector grad(num_params_, 0.0);
  for (size_t idx : IdOrder(batch)) {
    AccumulateExampleGradient(w, batch[idx], grad);
  }
  const double n = static_cast<double>(batch.size());
  for (double& g : grad) g /= n;
  return grad;
}

double Model::BatchLoss(std::span<const double> w,
                        std::span<const Example> batch) const {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidInput, "BatchLoss: empty batch");
  }
  double total = 0.0;
  for (size_t idx : IdOrder(batch)) total += ExampleLoss(w, batch[idx]);
  return total / static_cast<double>(batch.size());
}

}  // namespace clipgrain
