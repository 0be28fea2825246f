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

#include "clipgrain/clipping.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "clipgrain/errors.h"

namespace clipgrain {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Shortest %g rendering that parses back to the same double, preferring
// plain notation ("10" rather than "1e+01").
std::string ShortReal(double v) {
  char buf[32];
  for (bool allow_exponent : {false, true}) {
    for (int precision = 1; precision <= 17; ++precision) {
      std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
      const bool has_exponent = std::string_view(buf).find('e') !=
                                std::string_view::npos;
      if ((allow_exponent || !has_exponent) && std::strtod(buf, nullptr) == v) {
        return buf;
      }
    }
  }
  return buf;
}

void RequirePositiveBound(double bound, const char* who) {
  if (!(bound > 0.0)) {
    throw Error(ErrorCode::kConfig,
                std::string(who) + ": clipping bound must be > 0, got " +
                    ShortReal(bound));
  }
}

// Clips consecutive groups of `micro_size` per-example gradients and averages
// the clipped group gradients.
RealVector ClipMicroBatchesAndAverage(const std::vector<RealVector>& examples,
                                      size_t micro_size, double bound,
                                      size_t core_index) {
  if (examples.empty() || examples.size() % micro_size != 0) {
    throw Error(ErrorCode::kContract,
                "core " + std::to_string(core_index) + ": " +
                    std::to_string(examples.size()) +
                    " per-example gradients do not split into micro-batches "
                    "of " + std::to_string(micro_size));
  }
  const size_t n = examples.front().size();
  const size_t groups = examples.size() / micro_size;
  RealVector out(n, 0.0);
  for (size_t g = 0; g < groups; ++g) {
    RealVector micro(n, 0.0);
    for (size_t e = g * micro_size; e < (g + 1) * micro_size; ++e) {
      if (examples[e].size() != n) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "per-example gradient length mismatch");
      }
      for (size_t i = 0; i < n; ++i) micro[i] += examples[e][i];
    }
    for (double& v : micro) v /= static_cast<double>(micro_size);
    const RealVector clipped = ClipToBound(micro, bound);
    for (size_t i = 0; i < n; ++i) out[i] += clipped[i];
  }
  for (double& v : out) v /= static_cast<double>(groups);
  return out;
}

}  // namespace

std::string PolicyTag(const ClippingPolicy& policy) {
  return std::visit(
      Overloaded{
          [](const NoClipping&) { return std::string("none"); },
          [](const PerCoreClipping& p) { return "per_core@" + ShortReal(p.bound); },
          [](const AdaptivePerCoreClipping&) {
            return std::string("adaptive_per_core");
          },
          [](const PerExampleClipping& p) {
            return "per_example@" + ShortReal(p.bound);
          },
          [](const MicroBatchClipping& p) {
            return "micro_batch@" + ShortReal(p.bound) + "x" +
                   std::to_string(p.micro_size);
          },
      },
      policy);
}

void ValidatePolicy(const ClippingPolicy& policy, size_t per_core_batch) {
  std::visit(Overloaded{
                 [](const NoClipping&) {},
                 [](const AdaptivePerCoreClipping&) {},
                 [](const PerCoreClipping& p) {
                   RequirePositiveBound(p.bound, "per_core");
                 },
                 [](const PerExampleClipping& p) {
                   RequirePositiveBound(p.bound, "per_example");
                 },
                 [&](const MicroBatchClipping& p) {
                   RequirePositiveBound(p.bound, "micro_batch");
                   if (p.micro_size == 0 || per_core_batch % p.micro_size != 0) {
                     throw Error(ErrorCode::kConfig,
                                 "micro_batch: micro_size " +
                                     std::to_string(p.micro_size) +
                                     " does not divide per-core batch " +
                                     std::to_string(per_core_batch));
                   }
                 },
             },
             policy);
}

bool NeedsPerExampleGradients(const ClippingPolicy& policy) {
  return std::holds_alternative<PerExampleClipping>(policy) ||
         std::holds_alternative<MicroBatchClipping>(policy);
}

PerCoreGradient PerCoreGradient::Make(size_t core_index, RealVector grad) {
  const double norm = L2Norm(grad);
  return PerCoreGradient{core_index, std::move(grad), norm};
}

RealVector ClipToBound(std::span<const double> v, double bound) {
  RequirePositiveBound(bound, "ClipToBound");
  const double norm = L2Norm(v);
  if (norm <= bound) return RealVector(v.begin(), v.end());
  return Scale(bound / norm, v);
}

double AdaptiveBound(std::span<const PerCoreGradient> grads) {
  if (grads.empty()) {
    throw Error(ErrorCode::kInvalidInput, "AdaptiveBound: no per-core gradients");
  }
  double bound = grads.front().norm;
  for (const PerCoreGradient& g : grads) bound = std::min(bound, g.norm);
  return bound;
}

ClippedGradientSet ApplyPolicy(const ClippingPolicy& policy,
                               std::span<const PerCoreGradient> grads,
                               const PerExampleGradients* per_example) {
  const bool needs = NeedsPerExampleGradients(policy);
  if (needs && per_example == nullptr) {
    throw Error(ErrorCode::kContract,
                PolicyTag(policy) + " requires per-example gradients");
  }
  if (!needs && per_example != nullptr) {
    throw Error(ErrorCode::kContract,
                PolicyTag(policy) + " does not take per-example gradients");
  }
  if (needs && per_example->size() != grads.size()) {
    throw Error(ErrorCode::kContract,
                "per-example gradients supplied for " +
                    std::to_string(per_example->size()) + " cores, expected " +
                    std::to_string(grads.size()));
  }

  ClippedGradientSet out;
  out.grads.reserve(grads.size());
  std::visit(
      Overloaded{
          [&](const NoClipping&) {
            for (const PerCoreGradient& g : grads) out.grads.push_back(g.grad);
          },
          [&](const PerCoreClipping& p) {
            RequirePositiveBound(p.bound, "per_core");
            for (const PerCoreGradient& g : grads) {
              out.grads.push_back(g.norm <= p.bound
                                      ? g.grad
                                      : Scale(p.bound / g.norm, g.grad));
            }
            out.applied_bound = p.bound;
          },
          [&](const AdaptivePerCoreClipping&) {
            // Every norm must be known before any core is scaled.
            const double bound = AdaptiveBound(grads);
            for (const PerCoreGradient& g : grads) {
              if (g.norm == bound) {
                out.grads.push_back(g.grad);
              } else {
                out.grads.push_back(Scale(bound / g.norm, g.grad));
              }
            }
            out.applied_bound = bound;
          },
          [&](const PerExampleClipping& p) {
            RequirePositiveBound(p.bound, "per_example");
            for (size_t c = 0; c < grads.size(); ++c) {
              out.grads.push_back(ClipMicroBatchesAndAverage(
                  (*per_example)[c], 1, p.bound, grads[c].core_index));
            }
            out.applied_bound = p.bound;
          },
          [&](const MicroBatchClipping& p) {
            RequirePositiveBound(p.bound, "micro_batch");
            if (p.micro_size == 0) {
              throw Error(ErrorCode::kConfig, "micro_batch: micro_size is 0");
            }
            for (size_t c = 0; c < grads.size(); ++c) {
              out.grads.push_back(ClipMicroBatchesAndAverage(
                  (*per_example)[c], p.micro_size, p.bound,
                  grads[c].core_index));
            }
            out.applied_bound = p.bound;
          },
      },
      policy);
  return out;
}

}  // namespace clipgrain
