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

#include <string>
#include <vector>

#include "attnshare/model.h"
#include "attnshare/tensor.h"

namespace attnshare {

inline constexpr double kMraeEpsilon = 1e-6;
inline constexpr double kMraeClip = 10.0;

// Mean over elements of clip(|o - o'| / (max(|o|, |o'|) + 1e-6), 0, 10).
// Always in [0, 2] for finite inputs. Accumulates in double.
double mrae(const Tensor& o, const Tensor& o_prime);

// <a, b> / (|a| |b|) over the flattened tensors, in double. Throws
// UndefinedSimilarityError when either norm is zero.
double cosine_similarity(const Tensor& a, const Tensor& b);

// Rows x cols matrix of similarities with step labels on the columns.
struct SimilarityMatrix {
  int layer = 0;
  std::vector<int> labels;
  int rows = 0;
  int cols = 0;
  std::vector<float> values;  // row-major

  float at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }

  // Header row of labels, then one line per row.
  std::string to_csv() const;
};

enum class SimilarityMode {
  kStepWise,  // per layer, |T| x |T| cosine of conditional attention outputs
  kCfgWise,   // per layer, 1 x |T| cosine of cond vs uncond attention outputs
};

// One matrix per layer. Throws Error when `traces` is empty or incomplete.
std::vector<SimilarityMatrix> similarity_report(
    const std::vector<StepTrace>& traces, SimilarityMode mode);

}  // namespace attnshare
