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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "attnshare/config.h"
#include "attnshare/sharing.h"

namespace attnshare {

struct PlanMeta {
  double delta = 0.0;
  uint64_t seed = 0;
  int steps = 0;
  int layers = 0;
  // 0: a residual lives until a full evaluation replaces it. n > 0: a window
  // step whose residual is n or more steps old refreshes instead of reusing.
  // Serialized only when non-zero.
  int wars_refresh_interval = 0;
  // In-memory provenance; not part of the plan file.
  std::string config_hash;
  double search_seconds = 0.0;
};

// (step, layer) -> Strategy. Absent entries are Full.
class CompressionPlan {
 public:
  using Key = std::pair<int, int>;

  CompressionPlan() = default;
  CompressionPlan(int steps, int layers);

  PlanMeta meta;

  Strategy at(int step, int layer) const;
  // Setting kFull removes the entry.
  void set(int step, int layer, Strategy s);

  const std::map<Key, Strategy>& entries() const { return entries_; }
  size_t num_entries() const { return entries_.size(); }

  bool operator==(const CompressionPlan& other) const;

 private:
  std::map<Key, Strategy> entries_;
};

// The all-Full plan for a config.
CompressionPlan full_plan(const ModelConfig& cfg);

struct PlanViolation {
  int step = -1;
  int layer = -1;
  std::string reason;
};

std::string to_string(const PlanViolation& v);

// Empty result means the plan is feasible for `cfg`.
std::vector<PlanViolation> validate_plan(const CompressionPlan& plan,
                                         const ModelConfig& cfg);
// Throws PlanError listing every violation.
void require_valid_plan(const CompressionPlan& plan, const ModelConfig& cfg);

// Plan file: {"meta": {...}, "entries": [{"step", "layer", "strategy"}]},
// entries sorted by (step, layer).
std::string plan_to_json(const CompressionPlan& plan);
// Throws PlanError with the byte offset for malformed JSON, and with the
// offending token for unknown strategies.
CompressionPlan plan_from_json(const std::string& text);

// Rows are layers, columns are steps, cells are strategy tokens.
std::string plan_heatmap_csv(const CompressionPlan& plan);

// What one attention call actually does on one branch.
enum class AttnAction {
  kFull,         // full attention
  kWarsRefresh,  // full + window attention, residual stored
  kWarsReuse,    // window attention + cached residual
  kAstReuse,     // cached output from an earlier step
  kAscReuse,     // conditional output from this step
};

std::string_view action_token(AttnAction a);

struct LayerAction {
  AttnAction action = AttnAction::kFull;
  // Conditional pass keeps its output for the unconditional pass.
  bool store_for_asc = false;
};

// Resolves a plan into per-(step, layer, branch) actions. Window steps reuse
// the newest residual of their layer and branch; a full evaluation also
// computes the residual when the next non-reusing evaluation of that layer and
// branch is a window step that would consume it.
class ActionSchedule {
 public:
  struct Options {
    // Every full evaluation refreshes the residual. Used by the plan search,
    // which cannot see future steps.
    bool refresh_on_full = false;
  };

  ActionSchedule(const CompressionPlan& plan, int steps, int layers)
      : ActionSchedule(plan, steps, layers, Options{}) {}
  ActionSchedule(const CompressionPlan& plan, int steps, int layers,
                 Options options);

  const LayerAction& at(int step, int layer, Branch b) const;
  int steps() const { return steps_; }
  int layers() const { return layers_; }

 private:
  int steps_;
  int layers_;
  std::vector<LayerAction> actions_;
};

}  // namespace attnshare
