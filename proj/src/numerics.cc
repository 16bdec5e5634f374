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

#include "attnshare/numerics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "attnshare/errors.h"

namespace attnshare {
namespace {

void require_rank2(const Tensor& t, std::string_view op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                         shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

}  // namespace

void ensure_finite(const Tensor& t, std::string_view op) {
  if (!t.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite value in result");
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner extents " + shape_str(a.shape()) +
                         " * " + shape_str(b.shape()));
  }
  Tensor out({m, n});
  // i-p-j order: each out(i, j) still sums over p in increasing order.
  for (int64_t i = 0; i < m; ++i) {
    float* orow = out.raw() + i * n;
    for (int64_t p = 0; p < k; ++p) {
      const float av = a.at(i, p);
      const float* brow = b.raw() + p * n;
      for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  ensure_finite(out, "matmul");
  return out;
}

Tensor transpose(const Tensor& x) {
  require_rank2(x, "transpose");
  const int64_t m = x.dim(0), n = x.dim(1);
  Tensor out({n, m});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) out.at(j, i) = x.at(i, j);
  }
  return out;
}

Tensor row_softmax(const Tensor& x, const Tensor* mask) {
  require_rank2(x, "row_softmax");
  if (mask != nullptr) require_same_shape(x, *mask, "row_softmax mask");
  const int64_t m = x.dim(0), n = x.dim(1);
  Tensor out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    auto allowed = [&](int64_t j) {
      return mask == nullptr || mask->at(i, j) != 0.0f;
    };
    float row_max = -std::numeric_limits<float>::infinity();
    for (int64_t j = 0; j < n; ++j) {
      if (allowed(j)) row_max = std::max(row_max, x.at(i, j));
    }
    if (row_max == -std::numeric_limits<float>::infinity()) {
      throw InvalidMaskError("row_softmax: row " + std::to_string(i) +
                             " has no allowed position");
    }
    double denom = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      if (allowed(j)) denom += std::exp(static_cast<double>(x.at(i, j)) - row_max);
    }
    for (int64_t j = 0; j < n; ++j) {
      out.at(i, j) =
          allowed(j)
              ? static_cast<float>(
                    std::exp(static_cast<double>(x.at(i, j)) - row_max) / denom)
              : 0.0f;
    }
  }
  ensure_finite(out, "row_softmax");
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  float eps) {
  require_rank2(x, "layer_norm");
  const int64_t m = x.dim(0), n = x.dim(1);
  if (gain.size() != static_cast<size_t>(n) ||
      bias.size() != static_cast<size_t>(n)) {
    throw DimensionError("layer_norm: gain/bias length must be " +
                         std::to_string(n));
  }
  Tensor out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (int64_t j = 0; j < n; ++j) mean += x.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (int64_t j = 0; j < n; ++j) {
      const double d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int64_t j = 0; j < n; ++j) {
      out.at(i, j) = static_cast<float>((x.at(i, j) - mean) * inv) * gain[j] +
                     bias[j];
    }
  }
  ensure_finite(out, "layer_norm");
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  ensure_finite(out, "add");
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  ensure_finite(out, "sub");
  return out;
}

Tensor scale(const Tensor& x, float s) {
  Tensor out = x;
  for (float& v : out.data()) v *= s;
  ensure_finite(out, "scale");
  return out;
}

Tensor axpy(const Tensor& a, float s, const Tensor& b) {
  require_same_shape(a, b, "axpy");
  Tensor out = a;
  for (size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
  ensure_finite(out, "axpy");
  return out;
}

Tensor add_row(const Tensor& x, const Tensor& row) {
  require_rank2(x, "add_row");
  const int64_t m = x.dim(0), n = x.dim(1);
  if (row.size() != static_cast<size_t>(n)) {
    throw DimensionError("add_row: row length must be " + std::to_string(n));
  }
  Tensor out = x;
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) out.at(i, j) += row[j];
  }
  ensure_finite(out, "add_row");
  return out;
}

Tensor add_table_row(const Tensor& x, const Tensor& table, int64_t index) {
  require_rank2(x, "add_table_row");
  require_rank2(table, "add_table_row");
  if (table.dim(1) != x.dim(1)) {
    throw DimensionError("add_table_row: table width " +
                         std::to_string(table.dim(1)) + " vs " +
                         std::to_string(x.dim(1)));
  }
  if (index < 0 || index >= table.dim(0)) {
    throw DimensionError("add_table_row: row index " + std::to_string(index) +
                         " out of range");
  }
  const int64_t m = x.dim(0), n = x.dim(1);
  Tensor out = x;
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) out.at(i, j) += table.at(index, j);
  }
  ensure_finite(out, "add_table_row");
  return out;
}

Tensor gelu(const Tensor& x) {
  constexpr float kC = 0.7978845608028654f;  // sqrt(2 / pi)
  Tensor out = x;
  for (float& v : out.data()) {
    v = 0.5f * v * (1.0f + std::tanh(kC * (v + 0.044715f * v * v * v)));
  }
  ensure_finite(out, "gelu");
  return out;
}

}  // namespace attnshare
