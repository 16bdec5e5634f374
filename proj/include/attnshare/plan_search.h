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

#include <vector>

#include "attnshare/compression_plan.h"
#include "attnshare/model.h"

namespace attnshare {

struct SearchConfig {
  double delta = 0.05;
  // Must be ordered by ascending retained attention FLOPs and exclude kFull.
  std::vector<Strategy> strategies{kDefaultStrategyOrder.begin(),
                                   kDefaultStrategyOrder.end()};
  int class_id = 0;
};

struct SearchStats {
  int reference_evaluations = 0;
  int candidate_evaluations = 0;
  int skipped_infeasible = 0;
  double seconds = 0.0;
  // Latent at the end of the compressed calibration trajectory.
  Tensor final_latent;
  // Accepted loss per (step, layer) entry of the plan, in plan order.
  std::vector<double> accepted_losses;
};

// Retained share of a step's uncompressed attention FLOPs when `s` is applied
// to one layer (both passes, no residual refresh).
double retained_flops_fraction(Strategy s, const AttentionConfig& attn);

// Throws ConfigError unless delta >= 0 and the strategy list is non-empty,
// excludes kFull, and is ordered by non-decreasing retained FLOPs.
void validate_search_config(const SearchConfig& scfg, const ModelConfig& cfg);

// Whether `s` can be placed at `step` regardless of earlier choices.
bool strategy_feasible(Strategy s, int step);

// Greedy per-step, per-layer selection. At each step the uncompressed output
// at the current latent is the reference; layers are visited in order, each
// keeping the compression already chosen for earlier layers of the step, and
// get the first strategy whose noise-prediction MRAE against the reference is
// strictly below (layer + 1) / num_layers * delta. Cache state is rolled back
// between candidates, and the latent advances with the chosen step plan.
CompressionPlan search(const ToyDiT& model, const ModelConfig& cfg,
                       const SearchConfig& scfg, SearchStats* stats = nullptr);

}  // namespace attnshare
