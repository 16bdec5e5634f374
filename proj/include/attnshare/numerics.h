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

#include <string_view>

#include "attnshare/tensor.h"

// Dense float32 arithmetic used by the attention kernels and the toy model.
// Every loop has a fixed summation order so results are bitwise reproducible,
// and every op rejects results containing NaN or Inf.
namespace attnshare {

// [m x k] * [k x n] -> [m x n]. Accumulates in float along k in index order.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& x);

// Softmax over each row of a 2-D tensor. When `mask` is given, positions with
// a zero mask value get probability exactly 0. The normalizer is accumulated
// in double after subtracting the row max.
Tensor row_softmax(const Tensor& x, const Tensor* mask = nullptr);

// Per-row normalization of a [m x n] tensor with [n] gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  float eps = 1e-5f);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float s);

// a + s * b
Tensor axpy(const Tensor& a, float s, const Tensor& b);

// Adds a [n] vector to every row of a [m x n] tensor.
Tensor add_row(const Tensor& x, const Tensor& row);

// Adds row `index` of `table` [r x n] to every row of `x` [m x n].
Tensor add_table_row(const Tensor& x, const Tensor& table, int64_t index);

// tanh approximation of GELU.
Tensor gelu(const Tensor& x);

// Throws NumericError naming `op` when `t` holds a NaN or Inf.
void ensure_finite(const Tensor& t, std::string_view op);

}  // namespace attnshare
