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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "attnshare/compression_plan.h"
#include "attnshare/tensor.h"

namespace attnshare {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point for `attnshare search|generate|analyze|cost ...`. `args` excludes
// the program name. Never throws; errors become exit codes with a message on
// `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

// Latent dump: one JSON header line {"shape", "seed", "plan_hash"} followed by
// the raw float32 values, little-endian.
struct LatentDump {
  Shape shape;
  uint64_t seed = 0;
  std::string plan_hash;
  Tensor latent;
};

void write_latent_dump(const std::filesystem::path& path, const Tensor& latent,
                       uint64_t seed, const std::string& plan_hash);
LatentDump read_latent_dump(const std::filesystem::path& path);

// FNV-1a of the serialized plan, hex.
std::string plan_hash(const CompressionPlan& plan);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace attnshare
