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

#ifndef CLIPGRAIN_CLIPPING_H_
#define CLIPGRAIN_CLIPPING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clipgrain/numerics.h"

namespace clipgrain {

// Aggregate the per-core gradients untouched.
struct NoClipping {};

// Clip every per-core gradient to L2 norm `bound`.
struct PerCoreClipping {
  double bound = 1.0;
};

// Per step, clip every per-core gradient to the smallest per-core norm.
struct AdaptivePerCoreClipping {};

// Clip every per-example gradient to `bound`, then average within the core.
struct PerExampleClipping {
  double bound = 1.0;
};

// Split each core's shard into consecutive micro-batches of `micro_size`
// examples, clip each micro-batch mean gradient to `bound`, then average the
// clipped micro-batch gradients within the core. Micro-batches never span
// cores.
struct MicroBatchClipping {
  double bound = 1.0;
  size_t micro_size = 1;
};

using ClippingPolicy =
    std::variant<NoClipping, PerCoreClipping, AdaptivePerCoreClipping,
                 PerExampleClipping, MicroBatchClipping>;

// Stable short name used in file paths and reports, e.g. "none",
// "per_core@2.5", "adaptive_per_core", "per_example@1", "micro_batch@1x2".
std::string PolicyTag(const ClippingPolicy& policy);

// Throws kConfig when a bound is not strictly positive or when micro_size
// does not divide the per-core batch size.
void ValidatePolicy(const ClippingPolicy& policy, size_t per_core_batch);

// True for PerExample and MicroBatch, which operate below the core level.
bool NeedsPerExampleGradients(const ClippingPolicy& policy);

// One core's shard-mean gradient with its cached norm.
struct PerCoreGradient {
  size_t core_index = 0;
  RealVector grad;
  double norm = 0.0;

  static PerCoreGradient Make(size_t core_index, RealVector grad);
};

struct ClippedGradientSet {
  // One vector per core, in core-index order.
  std::vector<RealVector> grads;
  // b for PerCore/PerExample/MicroBatch, b_t for AdaptivePerCore, absent for
  // NoClipping.
  std::optional<double> applied_bound;
};

// Per-example gradients for each core, in shard order: [core][example].
using PerExampleGradients = std::vector<std::vector<RealVector>>;

// Returns v unchanged (bit for bit) when ||v|| <= bound, otherwise
// v * (bound / ||v||). Zero vectors pass through. Throws kConfig unless
// bound > 0; an infinite bound is accepted and never binds.
RealVector ClipToBound(std::span<const double> v, double bound);

// min_c ||g_c||. Throws kInvalidInput on an empty list.
double AdaptiveBound(std::span<const PerCoreGradient> grads);

// Applies `policy` to the per-core gradients of one step. `per_example` must
// be supplied exactly when NeedsPerExampleGradients(policy); otherwise a
// kContract error is thrown.
//
// AdaptivePerCore computes the shared bound from every core before scaling
// any of them. A core whose norm equals the bound is returned unchanged, and
// when the bound is 0 every core becomes the zero vector.
ClippedGradientSet ApplyPolicy(const ClippingPolicy& policy,
                               std::span<const PerCoreGradient> grads,
                               const PerExampleGradients* per_example = nullptr);

}  // namespace clipgrain

#endif  // CLIPGRAIN_CLIPPING_H_
