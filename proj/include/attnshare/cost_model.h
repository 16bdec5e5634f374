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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "attnshare/compression_plan.h"
#include "attnshare/config.h"

// Analytic attention FLOPs. Only the quadratic part is counted (Q K^T and
// P V, two FLOPs per multiply-add); projections and softmax are excluded
// since no strategy changes them.
namespace attnshare {

// 4 * heads * L^2 * head_dim.
uint64_t full_attention_flops(const AttentionConfig& cfg);
// 4 * heads * band_sum * head_dim.
uint64_t window_attention_flops(const AttentionConfig& cfg);

uint64_t attn_flops(AttnAction action, const AttentionConfig& cfg);
// Cost of `strategy` on `branch`; `refresh` selects a residual refresh for
// the window strategies.
uint64_t attn_flops(Strategy strategy, Branch branch, const AttentionConfig& cfg,
                    bool refresh);

struct CostEntry {
  int step = 0;
  int layer = 0;
  Branch branch = Branch::kCond;
  Strategy strategy = Strategy::kFull;
  AttnAction action = AttnAction::kFull;
  uint64_t flops = 0;
  uint64_t baseline_flops = 0;
};

class CostReport {
 public:
  void add(const CostEntry& entry);
  // Appends every entry of `other`.
  void merge(const CostReport& other);

  const std::vector<CostEntry>& entries() const { return entries_; }
  uint64_t total_flops() const { return total_; }
  uint64_t baseline_flops() const { return baseline_; }
  // total / baseline; 0 for an empty report.
  double fraction() const;
  // fraction() with four decimals.
  std::string fraction_string() const;

  uint64_t step_flops(int step) const;
  uint64_t step_baseline_flops(int step) const;

  // Keyed by the plan strategy of each entry.
  const std::map<Strategy, uint64_t>& strategy_subtotals() const {
    return subtotals_;
  }

  // Same entries in the same order.
  bool operator==(const CostReport& other) const;

  std::string to_json() const;
  // Columns: step, layer, branch, strategy, flops, fraction; then totals.
  void print_table(std::ostream& os) const;

 private:
  std::vector<CostEntry> entries_;
  std::map<Strategy, uint64_t> subtotals_;
  uint64_t total_ = 0;
  uint64_t baseline_ = 0;
};

// Tallies a plan over steps [step_begin, step_end) (step_end < 0: all
// steps). Residual refreshes follow the same schedule the sampler uses.
// Throws PlanError when the plan is infeasible.
CostReport aggregate(const CompressionPlan& plan, const ModelConfig& cfg,
                     int step_begin = 0, int step_end = -1);

}  // namespace attnshare
