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

#include "attnshare/attention.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "attnshare/errors.h"
#include "attnshare/numerics.h"

namespace attnshare {
namespace {

void check_qkv(const QKV& qkv, const AttentionConfig& cfg) {
  cfg.validate();
  const Shape want = cfg.qkv_shape();
  for (const Tensor* t : {&qkv.q, &qkv.k, &qkv.v}) {
    if (t->shape() != want) {
      throw DimensionError("attention: expected " + shape_str(want) +
                           ", got " + shape_str(t->shape()));
    }
  }
}

// Shared kernel for full and band attention. Both paths go through here so
// that a band covering every key reproduces full attention bit for bit.
template <typename BandFn>
Tensor attend(const QKV& qkv, const AttentionConfig& cfg, BandFn band_of) {
  check_qkv(qkv, cfg);
  const int64_t heads = cfg.num_heads, len = cfg.seq_len, dim = cfg.head_dim;
  const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(dim));
  Tensor out(cfg.qkv_shape());
  std::vector<float> scores(static_cast<size_t>(len));
  std::vector<double> expd(static_cast<size_t>(len));

  for (int64_t h = 0; h < heads; ++h) {
    const float* qh = qkv.q.raw() + h * len * dim;
    const float* kh = qkv.k.raw() + h * len * dim;
    const float* vh = qkv.v.raw() + h * len * dim;
    float* oh = out.raw() + h * len * dim;
    for (int64_t i = 0; i < len; ++i) {
      const Band band = band_of(i);
      const float* qi = qh + i * dim;
      float row_max = -std::numeric_limits<float>::infinity();
      for (int64_t j = band.first; j <= band.last; ++j) {
        const float* kj = kh + j * dim;
        float dot = 0.0f;
        for (int64_t c = 0; c < dim; ++c) dot += qi[c] * kj[c];
        scores[j] = dot * inv_sqrt_d;
        row_max = std::max(row_max, scores[j]);
      }
      double denom = 0.0;
      for (int64_t j = band.first; j <= band.last; ++j) {
        expd[j] = std::exp(static_cast<double>(scores[j]) - row_max);
        denom += expd[j];
      }
      float* oi = oh + i * dim;
      for (int64_t j = band.first; j <= band.last; ++j) {
        const float p = static_cast<float>(expd[j] / denom);
        const float* vj = vh + j * dim;
        for (int64_t c = 0; c < dim; ++c) oi[c] += p * vj[c];
      }
    }
  }
  ensure_finite(out, "attention");
  return out;
}

}  // namespace

int64_t default_window_width(int64_t seq_len) {
  return std::max<int64_t>(1, seq_len / 8);
}

AttentionConfig AttentionConfig::with_default_window(int64_t num_heads,
                                                     int64_t head_dim,
                                                     int64_t seq_len) {
  return {num_heads, head_dim, seq_len, default_window_width(seq_len)};
}

void AttentionConfig::validate() const {
  if (num_heads < 1 || head_dim < 1 || seq_len < 1) {
    throw ConfigError("attention config: heads, head_dim and seq_len must be "
                      "positive");
  }
  if (window_width < 1) {
    throw ConfigError("attention config: window width must be >= 1, got " +
                      std::to_string(window_width));
  }
}

Band window_band(const AttentionConfig& cfg, int64_t query) {
  if (cfg.window_is_full()) return {0, cfg.seq_len - 1};
  const int64_t half = cfg.half_width();
  return {std::max<int64_t>(0, query - half),
          std::min<int64_t>(cfg.seq_len - 1, query + half)};
}

int64_t band_sum(const AttentionConfig& cfg) {
  int64_t total = 0;
  for (int64_t i = 0; i < cfg.seq_len; ++i) total += window_band(cfg, i).size();
  return total;
}

Tensor full_attention(const QKV& qkv, const AttentionConfig& cfg) {
  const int64_t last = cfg.seq_len - 1;
  return attend(qkv, cfg, [last](int64_t) { return Band{0, last}; });
}

Tensor window_attention(const QKV& qkv, const AttentionConfig& cfg) {
  return attend(qkv, cfg, [&cfg](int64_t i) { return window_band(cfg, i); });
}

}  // namespace attnshare
