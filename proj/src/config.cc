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

#include "attnshare/config.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "attnshare/errors.h"

namespace attnshare {

int64_t ModelConfig::window_width() const {
  const auto w = static_cast<int64_t>(
      std::floor(static_cast<double>(seq_len) * window_frac));
  return std::max<int64_t>(1, w);
}

AttentionConfig ModelConfig::attention() const {
  return {num_heads, head_dim, seq_len, window_width()};
}

void ModelConfig::validate() const {
  if (num_layers < 1 || num_steps < 1 || seq_len < 1 || num_heads < 1 ||
      head_dim < 1 || mlp_ratio < 1 || num_classes < 1) {
    throw ConfigError("model config: all extents must be positive");
  }
  if (!(window_frac > 0.0) || !std::isfinite(window_frac)) {
    throw ConfigError("model config: window fraction must be positive");
  }
  if (!(guidance_scale >= 0.0f) || !std::isfinite(guidance_scale)) {
    throw ConfigError("model config: guidance scale must be >= 0");
  }
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string ModelConfig::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << "layers=" << num_layers << ";steps=" << num_steps
     << ";seqlen=" << seq_len << ";heads=" << num_heads
     << ";head_dim=" << head_dim << ";mlp_ratio=" << mlp_ratio
     << ";window_frac=" << window_frac << ";guidance=" << guidance_scale
     << ";seed=" << seed << ";classes=" << num_classes;
  return hex64(fnv1a64(os.str()));
}

}  // namespace attnshare
