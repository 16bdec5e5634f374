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
#include <string>

#include "attnshare/attention.h"

namespace attnshare {

struct ModelConfig {
  int num_layers = 8;
  int num_steps = 16;
  int64_t seq_len = 256;
  int64_t num_heads = 4;
  int64_t head_dim = 16;
  int64_t mlp_ratio = 4;
  // Window width as a fraction of seq_len, floored, at least 1.
  double window_frac = 0.125;
  float guidance_scale = 4.0f;
  uint64_t seed = 0;
  // Class table has num_classes rows plus a trailing null row.
  int num_classes = 10;

  int64_t model_dim() const { return num_heads * head_dim; }
  int null_class() const { return num_classes; }
  int64_t window_width() const;
  AttentionConfig attention() const;

  // Throws ConfigError when an extent is non-positive or the guidance scale is
  // negative.
  void validate() const;

  // Stable textual fingerprint of every field (FNV-1a, hex).
  std::string hash() const;
};

uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t v);

}  // namespace attnshare
