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

// Reference implementations for tests only. Everything here is written with
// plain loops in double precision and shares no code with the library's
// kernels.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "attnshare/attention.h"
#include "attnshare/numerics.h"
#include "attnshare/rng.h"
#include "attnshare/tensor.h"

namespace attnshare::oracle {

// Triple loop, j innermost over p in index order with a float accumulator:
// same rounding sequence as a fixed-order k-sum, so results can be compared
// bitwise.
inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (int64_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

// Key j is visible to query i under a band of total width w.
inline bool band_allows(int64_t i, int64_t j, int64_t len, int64_t w) {
  if (w >= len) return true;
  const int64_t half = (w - 1) / 2;
  return (i > j ? i - j : j - i) <= half;
}

// Per-element attention in double: explicit score, exp, normalize loops.
inline Tensor naive_attention(
    const QKV& qkv, const std::function<bool(int64_t, int64_t)>& allowed) {
  const int64_t heads = qkv.q.dim(0), len = qkv.q.dim(1), dim = qkv.q.dim(2);
  Tensor out({heads, len, dim});
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int64_t h = 0; h < heads; ++h) {
    for (int64_t i = 0; i < len; ++i) {
      std::vector<double> s(len, 0.0);
      double mx = -1e300;
      for (int64_t j = 0; j < len; ++j) {
        if (!allowed(i, j)) continue;
        double dot = 0.0;
        for (int64_t c = 0; c < dim; ++c) {
          dot += static_cast<double>(qkv.q.at(h, i, c)) * qkv.k.at(h, j, c);
        }
        s[j] = dot * scale;
        mx = std::max(mx, s[j]);
      }
      double z = 0.0;
      for (int64_t j = 0; j < len; ++j) {
        if (allowed(i, j)) z += std::exp(s[j] - mx);
      }
      for (int64_t c = 0; c < dim; ++c) {
        double acc = 0.0;
        for (int64_t j = 0; j < len; ++j) {
          if (allowed(i, j)) acc += std::exp(s[j] - mx) / z * qkv.v.at(h, j, c);
        }
        out.at(h, i, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline Tensor naive_full_attention(const QKV& qkv) {
  return naive_attention(qkv, [](int64_t, int64_t) { return true; });
}

// Dense masked path: full score matrix per head, a 0/1 band mask built from
// band_allows, then numerics::row_softmax and a plain P V product.
inline Tensor masked_window_attention(const QKV& qkv, int64_t w) {
  const int64_t heads = qkv.q.dim(0), len = qkv.q.dim(1), dim = qkv.q.dim(2);
  Tensor mask({len, len});
  for (int64_t i = 0; i < len; ++i) {
    for (int64_t j = 0; j < len; ++j) {
      mask.at(i, j) = band_allows(i, j, len, w) ? 1.0f : 0.0f;
    }
  }
  Tensor out({heads, len, dim});
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int64_t h = 0; h < heads; ++h) {
    Tensor scores({len, len});
    for (int64_t i = 0; i < len; ++i) {
      for (int64_t j = 0; j < len; ++j) {
        double dot = 0.0;
        for (int64_t c = 0; c < dim; ++c) {
          dot += static_cast<double>(qkv.q.at(h, i, c)) * qkv.k.at(h, j, c);
        }
        scores.at(i, j) = static_cast<float>(dot * scale);
      }
    }
    const Tensor p = row_softmax(scores, &mask);
    for (int64_t i = 0; i < len; ++i) {
      for (int64_t c = 0; c < dim; ++c) {
        double acc = 0.0;
        for (int64_t j = 0; j < len; ++j) acc += static_cast<double>(p.at(i, j)) * qkv.v.at(h, j, c);
        out.at(h, i, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

// Sum of band sizes by direct pair enumeration.
inline int64_t enumerate_band_pairs(int64_t len, int64_t w) {
  int64_t n = 0;
  for (int64_t i = 0; i < len; ++i) {
    for (int64_t j = 0; j < len; ++j) n += band_allows(i, j, len, w) ? 1 : 0;
  }
  return n;
}

inline QKV random_qkv(Rng& rng, int64_t heads, int64_t len, int64_t dim,
                      float stddev = 1.0f) {
  return {rng.normal_tensor({heads, len, dim}, stddev),
          rng.normal_tensor({heads, len, dim}, stddev),
          rng.normal_tensor({heads, len, dim}, stddev)};
}

}  // namespace attnshare::oracle
