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

#include "attnshare/rng.h"

#include <cmath>
#include <numbers>

namespace attnshare {

uint64_t Rng::splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(uint64_t seed, uint64_t stream)
    : seed_(seed),
      stream_(stream),
      engine_(splitmix64(seed ^ splitmix64(stream + 0x5851F42D4C957F2DULL))) {}

float Rng::uniform() {
  return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
}

double Rng::uniform_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

float Rng::normal() {
  if (spare_normal_) {
    double v = *spare_normal_;
    spare_normal_.reset();
    return static_cast<float>(v);
  }
  // 1 - u keeps the log argument in (0, 1].
  double u1 = 1.0 - uniform_double();
  double u2 = uniform_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  return static_cast<float>(r * std::cos(theta));
}

Tensor Rng::normal_tensor(const Shape& shape, float stddev) {
  Tensor t(shape);
  for (float& v : t.data()) v = normal() * stddev;
  return t;
}

Tensor Rng::uniform_tensor(const Shape& shape, float lo, float hi) {
  Tensor t(shape);
  for (float& v : t.data()) v = lo + (hi - lo) * uniform();
  return t;
}

}  // namespace attnshare
