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
#include <vector>

#include "attnshare/compression_plan.h"
#include "attnshare/config.h"
#include "attnshare/cost_model.h"
#include "attnshare/sharing.h"
#include "attnshare/tensor.h"

namespace attnshare {

// One pre-norm transformer block. Linear weights are [in x out].
struct LayerWeights {
  Tensor ln1_gain, ln1_bias;
  Tensor wq, wk, wv, wo;
  Tensor ln2_gain, ln2_bias;
  Tensor w1, b1;  // [D x mlp_ratio*D], [mlp_ratio*D]
  Tensor w2, b2;  // [mlp_ratio*D x D], [D]
};

// Small diffusion transformer over [seq_len x model_dim] latents. Timestep and
// class embeddings are added to every token before block 0; the last class
// row is the null condition used by the unconditional pass.
struct ToyDiT {
  std::vector<LayerWeights> layers;
  Tensor time_embed;   // [num_steps x D]
  Tensor class_embed;  // [(num_classes + 1) x D]
  Tensor final_gain, final_bias;
  Tensor w_out;  // [D x D], noise-prediction head

  // Draws every weight from the kWeights stream of cfg.seed: linear weights
  // N(0, 0.02^2) in declaration order per layer (wq, wk, wv, wo, w1, w2), then
  // time_embed and class_embed N(0, 1), then w_out N(0, 0.02^2). Biases are
  // zero and norm gains one.
  static ToyDiT init(const ModelConfig& cfg);
};

// Starting latent, drawn from the kLatent stream of cfg.seed.
Tensor initial_latent(const ModelConfig& cfg);

// Projects normalized tokens to per-head Q, K, V.
QKV project_qkv(const LayerWeights& w, const Tensor& normed,
                const AttentionConfig& attn);

// Applies block `layer` to x [L x D] with an already-resolved attention action.
// Every evaluation except a step-reuse stores its attention output for later
// step-reuse on this branch; store_for_asc additionally keeps it for the
// unconditional pass. Throws CacheMissError / OrderingError when the action's
// cache prerequisite is missing and PlanError for a cross-branch reuse on the
// conditional pass. When `attn_out` is non-null it receives the attention
// output (pre output-projection, [heads x L x head_dim]).
Tensor block_forward(const ToyDiT& model, const ModelConfig& cfg,
                     const Tensor& x, int layer, int step, Branch branch,
                     const LayerAction& action, CacheState& cache,
                     Tensor* attn_out = nullptr);

// Strategy form. Window strategies reuse a residual from an earlier step when
// one is cached and refresh otherwise.
Tensor block_forward(const ToyDiT& model, const ModelConfig& cfg,
                     const Tensor& x, int layer, int step, Branch branch,
                     Strategy strategy, CacheState& cache,
                     Tensor* attn_out = nullptr);

// Attention outputs and noise predictions of one step, indexed by branch.
struct StepTrace {
  int step = 0;
  std::array<std::vector<Tensor>, kNumBranches> attention;  // [branch][layer]
  std::array<Tensor, kNumBranches> eps;
};

struct StepResult {
  Tensor eps_cond;
  Tensor eps_uncond;
  Tensor eps;  // eps_u + s * (eps_c - eps_u)
  std::optional<StepTrace> trace;
};

struct StepOptions {
  bool trace = false;
  // Receives one entry per (layer, branch) when non-null.
  CostReport* cost = nullptr;
};

// Runs the conditional then the unconditional pass of `step` at latent x,
// following `schedule`, and clears the step's cross-branch cache afterwards.
// `plan` only labels cost entries.
StepResult evaluate_step(const ToyDiT& model, const ModelConfig& cfg,
                         const CompressionPlan& plan,
                         const ActionSchedule& schedule, int step,
                         const Tensor& x, int class_id, CacheState& cache,
                         const StepOptions& options = {});

// x_{t+1} = x_t - eps / num_steps.
Tensor advance_latent(const ModelConfig& cfg, const Tensor& x,
                      const Tensor& eps);

struct SampleResult {
  Tensor latent;
  std::vector<StepTrace> traces;  // empty unless tracing
  CostReport cost;
};

// Full guided sampling run under `plan`. The plan is validated before any
// compute (PlanError on violation).
SampleResult sample(const ToyDiT& model, const ModelConfig& cfg,
                    const CompressionPlan& plan, int class_id,
                    bool trace = false);

}  // namespace attnshare
