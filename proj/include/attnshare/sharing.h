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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attnshare/attention.h"
#include "attnshare/tensor.h"

namespace attnshare {

// Per-(step, layer) compression choice.
//   kAst:     reuse this layer's attention output from an earlier step.
//   kWars:    window attention plus a cached full-minus-window residual.
//   kAsc:     unconditional pass reuses the conditional pass's output.
//   kWarsAsc: kWars on the conditional pass, kAsc on the unconditional one.
enum class Strategy { kFull, kAst, kWars, kAsc, kWarsAsc };

// Search order, ascending retained attention FLOPs.
inline constexpr std::array<Strategy, 4> kDefaultStrategyOrder = {
    Strategy::kAst, Strategy::kWarsAsc, Strategy::kWars, Strategy::kAsc};

std::string_view strategy_token(Strategy s);
// Throws PlanError naming the token when it is not one of
// full|ast|wars|asc|wars_asc.
Strategy parse_strategy(std::string_view token);

enum class Branch { kCond = 0, kUncond = 1 };
inline constexpr int kNumBranches = 2;
std::string_view branch_token(Branch b);

// Single-slot caches, one writer (the sampler loop). Temporal caches (window
// residual, step reuse) are kept per (layer, branch); the cross-branch slot is
// per layer and stamped with the step that filled it.
class CacheState {
 public:
  CacheState() = default;
  explicit CacheState(int num_layers);

  int num_layers() const { return static_cast<int>(slots_.size()); }

  struct Stamped {
    Tensor value;
    int step = -1;
  };

  const std::optional<Stamped>& wars_residual(int layer, Branch b) const;
  const std::optional<Stamped>& ast_output(int layer, Branch b) const;
  const std::optional<Stamped>& cond_output(int layer) const;

  void set_wars_residual(int layer, Branch b, Tensor value, int step);
  void set_ast_output(int layer, Branch b, Tensor value, int step);
  void set_cond_output(int layer, Tensor value, int step);

  // Drops every cross-branch output stamped with `step`.
  void end_step(int step);

 private:
  struct BranchSlots {
    std::optional<Stamped> wars_residual;
    std::optional<Stamped> ast_output;
  };
  struct LayerSlots {
    std::array<BranchSlots, kNumBranches> branch;
    std::optional<Stamped> cond_output;
  };

  LayerSlots& layer_slots(int layer);
  const LayerSlots& layer_slots(int layer) const;

  std::vector<LayerSlots> slots_;
};

// Computes full and window attention, caches residual = full - window stamped
// with `step`, and returns the full output.
Tensor wars_refresh(const QKV& qkv, const AttentionConfig& cfg,
                    CacheState& cache, int layer, Branch branch, int step);

// window_attention(qkv) + cached residual. Throws CacheMissError when nothing
// is cached and OrderingError when the residual is not from an earlier step.
Tensor wars_reuse(const QKV& qkv, const AttentionConfig& cfg,
                  const CacheState& cache, int layer, Branch branch, int step);

void ast_store(CacheState& cache, int layer, Branch branch, int step,
               const Tensor& output);
// Cached output, unchanged. CacheMissError when nothing was stored,
// OrderingError when the stored value is not from an earlier step.
Tensor ast_reuse(const CacheState& cache, int layer, Branch branch, int step);

void asc_store(CacheState& cache, int layer, int step, const Tensor& output);
// The conditional pass's output for this layer and step. OrderingError unless
// it was stored during `step`.
Tensor asc_reuse(const CacheState& cache, int layer, int step);

}  // namespace attnshare
