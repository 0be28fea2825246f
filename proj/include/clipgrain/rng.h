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

#ifndef CLIPGRAIN_RNG_H_
#define CLIPGRAIN_RNG_H_

#include <array>
#include <cstdint>

namespace clipgrain {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to expand seeds and to
// derive child stream seeds.
uint64_t SplitMix64(uint64_t& state);

// Deterministic generator: xoshiro256** (Blackman & Vigna 2018) seeded by four
// SplitMix64 outputs. The full algorithm lives here so that a seed produces
// the same stream on every platform and standard library.
//
// A SeededRng has a single owner. Work that runs in parallel receives a child
// stream from Split(), which depends only on (seed, stream_index) and not on
// how many values the parent has drawn.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed);

  uint64_t seed() const { return seed_; }

  uint64_t NextU64();

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();

  // Uniform on [lo, hi).
  double Uniform(double lo, double hi);

  // Uniform integer on [0, n). n must be > 0.
  uint64_t UniformInt(uint64_t n);

  // Standard normal via the Marsaglia polar method.
  double Normal();

  SeededRng Split(uint64_t stream_index) const;

 private:
  uint64_t seed_;
  std::array<uint64_t, 4> s_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace clipgrain

#endif  // CLIPGRAIN_RNG_H_
