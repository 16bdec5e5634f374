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

#include "attnshare/plan_search.h"

#include <chrono>
#include <cmath>
#include <string>

#include "attnshare/cost_model.h"
#include "attnshare/errors.h"
#include "attnshare/metrics.h"

namespace attnshare {

double retained_flops_fraction(Strategy s, const AttentionConfig& attn) {
  const double kept =
      static_cast<double>(attn_flops(s, Branch::kCond, attn, false)) +
      static_cast<double>(attn_flops(s, Branch::kUncond, attn, false));
  return kept / (2.0 * static_cast<double>(full_attention_flops(attn)));
}

void validate_search_config(const SearchConfig& scfg, const ModelConfig& cfg) {
  if (!(scfg.delta >= 0.0) || std::isnan(scfg.delta)) {
    throw ConfigError("search: delta must be >= 0");
  }
  if (scfg.strategies.empty()) {
    throw ConfigError("search: empty strategy list");
  }
  const AttentionConfig attn = cfg.attention();
  double prev = -1.0;
  for (Strategy s : scfg.strategies) {
    if (s == Strategy::kFull) {
      throw ConfigError("search: 'full' is not a compression strategy");
    }
    const double r = retained_flops_fraction(s, attn);
    if (r < prev) {
      throw ConfigError("search: strategy list must be ordered by ascending "
                        "retained FLOPs ('" +
                        std::string(strategy_token(s)) + "' out of order)");
    }
    prev = r;
  }
  if (scfg.class_id < 0 || scfg.class_id >= cfg.num_classes) {
    throw ConfigError("search: class id out of range");
  }
}

bool strategy_feasible(Strategy s, int step) {
  return !(s == Strategy::kAst && step == 0);
}

CompressionPlan search(const ToyDiT& model, const ModelConfig& cfg,
                       const SearchConfig& scfg, SearchStats* stats) {
  cfg.validate();
  validate_search_config(scfg, cfg);
  const auto started = std::chrono::steady_clock::now();

  CompressionPlan plan(cfg.num_steps, cfg.num_layers);
  plan.meta.delta = scfg.delta;
  plan.meta.seed = cfg.seed;
  plan.meta.config_hash = cfg.hash();

  const CompressionPlan uncompressed = full_plan(cfg);
  const ActionSchedule reference_schedule(uncompressed, cfg.num_steps,
                                          cfg.num_layers);
  // The search cannot see later steps, so every full evaluation keeps a
  // residual. Outputs are unaffected; only the calibration run pays for it.
  const ActionSchedule::Options opts{.refresh_on_full = true};

  SearchStats local;
  CacheState cache(cfg.num_layers);
  Tensor x = initial_latent(cfg);

  for (int t = 0; t < cfg.num_steps; ++t) {
    CacheState scratch = cache;
    const Tensor reference =
        evaluate_step(model, cfg, uncompressed, reference_schedule, t, x,
                      scfg.class_id, scratch)
            .eps;
    ++local.reference_evaluations;

    for (int layer = 0; layer < cfg.num_layers; ++layer) {
      const double threshold = static_cast<double>(layer + 1) /
                               static_cast<double>(cfg.num_layers) * scfg.delta;
      bool accepted = false;
      for (Strategy s : scfg.strategies) {
        if (!strategy_feasible(s, t)) {
          ++local.skipped_infeasible;
          continue;
        }
        plan.set(t, layer, s);
        const ActionSchedule schedule(plan, cfg.num_steps, cfg.num_layers, opts);
        CacheState trial = cache;
        const Tensor out = evaluate_step(model, cfg, plan, schedule, t, x,
                                         scfg.class_id, trial)
                               .eps;
        ++local.candidate_evaluations;
        const double loss = mrae(reference, out);
        if (loss < threshold) {
          local.accepted_losses.push_back(loss);
          accepted = true;
          break;
        }
      }
      if (!accepted) plan.set(t, layer, Strategy::kFull);
    }

    const ActionSchedule schedule(plan, cfg.num_steps, cfg.num_layers, opts);
    const StepResult committed =
        evaluate_step(model, cfg, plan, schedule, t, x, scfg.class_id, cache);
    x = advance_latent(cfg, x, committed.eps);
  }

  local.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - started)
                      .count();
  local.final_latent = std::move(x);
  plan.meta.search_seconds = local.seconds;
  if (stats != nullptr) *stats = std::move(local);
  return plan;
}

}  // namespace attnshare
