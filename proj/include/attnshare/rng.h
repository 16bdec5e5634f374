/* Copyright 2026 The attnshare Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "attnshare/tensor.h"

namespace attnshare {

// Named streams split off a single user seed.
enum class RngStream : uint64_t {
  kDefault = 0,
  kWeights = 1,
  kLatent = 2,
  kTest = 3,
};

// Deterministic generator: std::mt19937_64 seeded with a SplitMix64 mix of
// (seed, stream). The engine's output sequence is fixed by the C++ standard,
// and the uniform/normal transforms below are done by hand (not through
// std::*_distribution, whose algorithms are implementation-defined), so equal
// (seed, stream) pairs give equal streams on every conforming platform.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);
  Rng(uint64_t seed, RngStream stream)
      : Rng(seed, static_cast<uint64_t>(stream)) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  // Independent generator for another stream of the same seed.
  Rng split(uint64_t stream) const { return Rng(seed_, stream); }
  Rng split(RngStream stream) const { return Rng(seed_, stream); }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 24 random mantissa bits.
  float uniform();
  // Uniform in [0, 1) with 53 random bits.
  double uniform_double();
  // Standard normal via Box-Muller.
  float normal();

  Tensor normal_tensor(const Shape& shape, float stddev = 1.0f);
  Tensor uniform_tensor(const Shape& shape, float lo, float hi);

  static uint64_t splitmix64(uint64_t x);

 private:
  uint64_t seed_;
  uint64_t stream_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace attnshare
