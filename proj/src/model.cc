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

#include "attnshare/model.h"

#include <string>

#include "attnshare/errors.h"
#include "attnshare/numerics.h"
#include "attnshare/rng.h"

namespace attnshare {
namespace {

constexpr float kWeightStd = 0.02f;
constexpr float kEmbedStd = 1.0f;

Tensor ones(int64_t n) { return Tensor({n}, 1.0f); }
Tensor zeros(int64_t n) { return Tensor({n}, 0.0f); }

// [heads x L x d] -> [L x heads*d]
Tensor merge_heads(const Tensor& t) {
  const int64_t heads = t.dim(0), len = t.dim(1), dim = t.dim(2);
  Tensor out({len, heads * dim});
  for (int64_t h = 0; h < heads; ++h) {
    for (int64_t i = 0; i < len; ++i) {
      for (int64_t c = 0; c < dim; ++c) out.at(i, h * dim + c) = t.at(h, i, c);
    }
  }
  return out;
}

Tensor split_heads(const Tensor& t, const AttentionConfig& attn) {
  Tensor out(attn.qkv_shape());
  for (int64_t h = 0; h < attn.num_heads; ++h) {
    for (int64_t i = 0; i < attn.seq_len; ++i) {
      for (int64_t c = 0; c < attn.head_dim; ++c) {
        out.at(h, i, c) = t.at(i, h * attn.head_dim + c);
      }
    }
  }
  return out;
}

LayerAction causal_action(const CacheState& cache, int layer, int step,
                          Branch branch, Strategy strategy) {
  const bool uncond = branch == Branch::kUncond;
  LayerAction a;
  a.store_for_asc = !uncond && (strategy == Strategy::kAsc ||
                                strategy == Strategy::kWarsAsc);
  switch (strategy) {
    case Strategy::kFull:
      a.action = AttnAction::kFull;
      break;
    case Strategy::kAst:
      a.action = AttnAction::kAstReuse;
      break;
    case Strategy::kAsc:
      a.action = uncond ? AttnAction::kAscReuse : AttnAction::kFull;
      break;
    case Strategy::kWarsAsc:
      if (uncond) {
        a.action = AttnAction::kAscReuse;
        break;
      }
      [[fallthrough]];
    case Strategy::kWars: {
      const auto& r = cache.wars_residual(layer, branch);
      a.action = r && r->step < step ? AttnAction::kWarsReuse
                                     : AttnAction::kWarsRefresh;
      break;
    }
  }
  return a;
}

}  // namespace

ToyDiT ToyDiT::init(const ModelConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, RngStream::kWeights);
  const int64_t d = cfg.model_dim();
  const int64_t hidden = cfg.mlp_ratio * d;
  ToyDiT m;
  m.layers.reserve(static_cast<size_t>(cfg.num_layers));
  for (int i = 0; i < cfg.num_layers; ++i) {
    LayerWeights w;
    w.ln1_gain = ones(d);
    w.ln1_bias = zeros(d);
    w.wq = rng.normal_tensor({d, d}, kWeightStd);
    w.wk = rng.normal_tensor({d, d}, kWeightStd);
    w.wv = rng.normal_tensor({d, d}, kWeightStd);
    w.wo = rng.normal_tensor({d, d}, kWeightStd);
    w.ln2_gain = ones(d);
    w.ln2_bias = zeros(d);
    w.w1 = rng.normal_tensor({d, hidden}, kWeightStd);
    w.b1 = zeros(hidden);
    w.w2 = rng.normal_tensor({hidden, d}, kWeightStd);
    w.b2 = zeros(d);
    m.layers.push_back(std::move(w));
  }
  m.time_embed = rng.normal_tensor({cfg.num_steps, d}, kEmbedStd);
  m.class_embed = rng.normal_tensor({cfg.num_classes + 1, d}, kEmbedStd);
  m.final_gain = ones(d);
  m.final_bias = zeros(d);
  m.w_out = rng.normal_tensor({d, d}, kWeightStd);
  return m;
}

Tensor initial_latent(const ModelConfig& cfg) {
  Rng rng(cfg.seed, RngStream::kLatent);
  return rng.normal_tensor({cfg.seq_len, cfg.model_dim()});
}

QKV project_qkv(const LayerWeights& w, const Tensor& normed,
                const AttentionConfig& attn) {
  return {split_heads(matmul(normed, w.wq), attn),
          split_heads(matmul(normed, w.wk), attn),
          split_heads(matmul(normed, w.wv), attn)};
}

Tensor block_forward(const ToyDiT& model, const ModelConfig& cfg,
                     const Tensor& x, int layer, int step, Branch branch,
                     const LayerAction& action, CacheState& cache,
                     Tensor* attn_out) {
  if (layer < 0 || layer >= static_cast<int>(model.layers.size())) {
    throw DimensionError("block_forward: layer " + std::to_string(layer) +
                         " out of range");
  }
  if (x.shape() != Shape{cfg.seq_len, cfg.model_dim()}) {
    throw DimensionError("block_forward: latent shape " + shape_str(x.shape()));
  }
  if (action.action == AttnAction::kAscReuse && branch == Branch::kCond) {
    throw PlanError("cross-branch reuse requested on the conditional pass at "
                    "step " + std::to_string(step) + ", layer " +
                    std::to_string(layer));
  }
  const LayerWeights& w = model.layers[static_cast<size_t>(layer)];
  const AttentionConfig attn = cfg.attention();

  Tensor heads;
  if (action.action == AttnAction::kAstReuse) {
    heads = ast_reuse(cache, layer, branch, step);
  } else if (action.action == AttnAction::kAscReuse) {
    heads = asc_reuse(cache, layer, step);
  } else {
    const QKV qkv = project_qkv(w, layer_norm(x, w.ln1_gain, w.ln1_bias), attn);
    switch (action.action) {
      case AttnAction::kWarsRefresh:
        heads = wars_refresh(qkv, attn, cache, layer, branch, step);
        break;
      case AttnAction::kWarsReuse:
        heads = wars_reuse(qkv, attn, cache, layer, branch, step);
        break;
      default:
        heads = full_attention(qkv, attn);
        break;
    }
  }
  if (action.action != AttnAction::kAstReuse) {
    ast_store(cache, layer, branch, step, heads);
  }
  if (action.store_for_asc) asc_store(cache, layer, step, heads);

  Tensor h = add(x, matmul(merge_heads(heads), w.wo));
  Tensor mlp = gelu(add_row(matmul(layer_norm(h, w.ln2_gain, w.ln2_bias), w.w1),
                            w.b1));
  Tensor out = add(h, add_row(matmul(mlp, w.w2), w.b2));
  if (attn_out != nullptr) *attn_out = std::move(heads);
  return out;
}

Tensor block_forward(const ToyDiT& model, const ModelConfig& cfg,
                     const Tensor& x, int layer, int step, Branch branch,
                     Strategy strategy, CacheState& cache, Tensor* attn_out) {
  return block_forward(model, cfg, x, layer, step, branch,
                       causal_action(cache, layer, step, branch, strategy),
                       cache, attn_out);
}

StepResult evaluate_step(const ToyDiT& model, const ModelConfig& cfg,
                         const CompressionPlan& plan,
                         const ActionSchedule& schedule, int step,
                         const Tensor& x, int class_id, CacheState& cache,
                         const StepOptions& options) {
  const AttentionConfig attn = cfg.attention();
  const uint64_t baseline = full_attention_flops(attn);
  StepResult result;
  if (options.trace) {
    result.trace.emplace();
    result.trace->step = step;
  }
  const Tensor base = add_table_row(x, model.time_embed, step);
  // Conditional first: the unconditional pass may read its outputs.
  for (Branch b : {Branch::kCond, Branch::kUncond}) {
    const int row = b == Branch::kCond ? class_id : cfg.null_class();
    Tensor h = add_table_row(base, model.class_embed, row);
    for (int layer = 0; layer < cfg.num_layers; ++layer) {
      const LayerAction& action = schedule.at(step, layer, b);
      Tensor heads;
      h = block_forward(model, cfg, h, layer, step, b, action, cache,
                        options.trace ? &heads : nullptr);
      if (options.trace) {
        result.trace->attention[static_cast<int>(b)].push_back(std::move(heads));
      }
      if (options.cost != nullptr) {
        options.cost->add({step, layer, b, plan.at(step, layer), action.action,
                           attn_flops(action.action, attn), baseline});
      }
    }
    Tensor eps = matmul(layer_norm(h, model.final_gain, model.final_bias),
                        model.w_out);
    if (options.trace) result.trace->eps[static_cast<int>(b)] = eps;
    (b == Branch::kCond ? result.eps_cond : result.eps_uncond) = std::move(eps);
  }
  cache.end_step(step);
  result.eps = axpy(result.eps_uncond, cfg.guidance_scale,
                    sub(result.eps_cond, result.eps_uncond));
  return result;
}

Tensor advance_latent(const ModelConfig& cfg, const Tensor& x,
                      const Tensor& eps) {
  return axpy(x, -1.0f / static_cast<float>(cfg.num_steps), eps);
}

SampleResult sample(const ToyDiT& model, const ModelConfig& cfg,
                    const CompressionPlan& plan, int class_id, bool trace) {
  cfg.validate();
  if (class_id < 0 || class_id >= cfg.num_classes) {
    throw ConfigError("class id " + std::to_string(class_id) +
                      " out of range");
  }
  require_valid_plan(plan, cfg);
  const ActionSchedule schedule(plan, cfg.num_steps, cfg.num_layers);
  CacheState cache(cfg.num_layers);
  SampleResult result;
  StepOptions options;
  options.trace = trace;
  options.cost = &result.cost;
  Tensor x = initial_latent(cfg);
  for (int t = 0; t < cfg.num_steps; ++t) {
    StepResult step =
        evaluate_step(model, cfg, plan, schedule, t, x, class_id, cache, options);
    x = advance_latent(cfg, x, step.eps);
    if (trace) result.traces.push_back(std::move(*step.trace));
  }
  result.latent = std::move(x);
  return result;
}

}  // namespace attnshare
