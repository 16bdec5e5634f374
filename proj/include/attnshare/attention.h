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

#include "attnshare/tensor.h"

namespace attnshare {

// Window width defaults to an eighth of the token count.
int64_t default_window_width(int64_t seq_len);

struct AttentionConfig {
  int64_t num_heads = 1;
  int64_t head_dim = 1;
  int64_t seq_len = 1;
  // Total band width in tokens, not the half-width.
  int64_t window_width = 1;

  static AttentionConfig with_default_window(int64_t num_heads,
                                             int64_t head_dim,
                                             int64_t seq_len);

  // Throws ConfigError on non-positive extents or window.
  void validate() const;

  // Window covers the whole sequence; window attention is full attention.
  bool window_is_full() const { return window_width >= seq_len; }
  int64_t half_width() const { return (window_width - 1) / 2; }

  Shape qkv_shape() const { return {num_heads, seq_len, head_dim}; }
};

// Q, K, V laid out [num_heads x seq_len x head_dim].
struct QKV {
  Tensor q;
  Tensor k;
  Tensor v;
};

// Inclusive key range [first, last] seen by `query` under the band. Half-width
// is floor((w - 1) / 2), clipped to the sequence; w >= L covers every key.
struct Band {
  int64_t first;
  int64_t last;
  int64_t size() const { return last - first + 1; }
};
Band window_band(const AttentionConfig& cfg, int64_t query);

// Sum over queries of the realized band size.
int64_t band_sum(const AttentionConfig& cfg);

// Per head: softmax(Q K^T / sqrt(head_dim)) V.
Tensor full_attention(const QKV& qkv, const AttentionConfig& cfg);

// Symmetric non-causal band attention. Scores are only computed inside each
// query's band, so the work done is proportional to band_sum(cfg).
Tensor window_attention(const QKV& qkv, const AttentionConfig& cfg);

}  // namespace attnshare
