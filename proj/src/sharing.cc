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

#include "attnshare/sharing.h"

#include <string>

#include "attnshare/errors.h"
#include "attnshare/numerics.h"

namespace attnshare {

std::string_view strategy_token(Strategy s) {
  switch (s) {
    case Strategy::kFull:
      return "full";
    case Strategy::kAst:
      return "ast";
    case Strategy::kWars:
      return "wars";
    case Strategy::kAsc:
      return "asc";
    case Strategy::kWarsAsc:
      return "wars_asc";
  }
  return "?";
}

Strategy parse_strategy(std::string_view token) {
  for (Strategy s : {Strategy::kFull, Strategy::kAst, Strategy::kWars,
                     Strategy::kAsc, Strategy::kWarsAsc}) {
    if (strategy_token(s) == token) return s;
  }
  throw PlanError("unknown strategy token '" + std::string(token) + "'");
}

std::string_view branch_token(Branch b) {
  return b == Branch::kCond ? "cond" : "uncond";
}

CacheState::CacheState(int num_layers)
    : slots_(static_cast<size_t>(num_layers)) {}

CacheState::LayerSlots& CacheState::layer_slots(int layer) {
  if (layer < 0 || layer >= num_layers()) {
    throw DimensionError("cache: layer " + std::to_string(layer) +
                         " out of range");
  }
  return slots_[static_cast<size_t>(layer)];
}

const CacheState::LayerSlots& CacheState::layer_slots(int layer) const {
  return const_cast<CacheState*>(this)->layer_slots(layer);
}

const std::optional<CacheState::Stamped>& CacheState::wars_residual(
    int layer, Branch b) const {
  return layer_slots(layer).branch[static_cast<int>(b)].wars_residual;
}

const std::optional<CacheState::Stamped>& CacheState::ast_output(
    int layer, Branch b) const {
  return layer_slots(layer).branch[static_cast<int>(b)].ast_output;
}

const std::optional<CacheState::Stamped>& CacheState::cond_output(
    int layer) const {
  return layer_slots(layer).cond_output;
}

void CacheState::set_wars_residual(int layer, Branch b, Tensor value,
                                   int step) {
  layer_slots(layer).branch[static_cast<int>(b)].wars_residual =
      Stamped{std::move(value), step};
}

void CacheState::set_ast_output(int layer, Branch b, Tensor value, int step) {
  layer_slots(layer).branch[static_cast<int>(b)].ast_output =
      Stamped{std::move(value), step};
}

void CacheState::set_cond_output(int layer, Tensor value, int step) {
  layer_slots(layer).cond_output = Stamped{std::move(value), step};
}

void CacheState::end_step(int step) {
  for (LayerSlots& s : slots_) {
    if (s.cond_output && s.cond_output->step == step) s.cond_output.reset();
  }
}

Tensor wars_refresh(const QKV& qkv, const AttentionConfig& cfg,
                    CacheState& cache, int layer, Branch branch, int step) {
  Tensor full = full_attention(qkv, cfg);
  Tensor window = window_attention(qkv, cfg);
  cache.set_wars_residual(layer, branch, sub(full, window), step);
  return full;
}

Tensor wars_reuse(const QKV& qkv, const AttentionConfig& cfg,
                  const CacheState& cache, int layer, Branch branch,
                  int step) {
  const auto& residual = cache.wars_residual(layer, branch);
  if (!residual) {
    throw CacheMissError("wars_reuse: no residual cached for layer " +
                         std::to_string(layer) + " (" +
                         std::string(branch_token(branch)) + ")");
  }
  if (residual->step >= step) {
    throw OrderingError("wars_reuse: residual from step " +
                        std::to_string(residual->step) +
                        " cannot serve step " + std::to_string(step));
  }
  return add(window_attention(qkv, cfg), residual->value);
}

void ast_store(CacheState& cache, int layer, Branch branch, int step,
               const Tensor& output) {
  cache.set_ast_output(layer, branch, output, step);
}

Tensor ast_reuse(const CacheState& cache, int layer, Branch branch, int step) {
  const auto& stored = cache.ast_output(layer, branch);
  if (!stored) {
    throw CacheMissError("ast_reuse: no output cached for layer " +
                         std::to_string(layer) + " (" +
                         std::string(branch_token(branch)) + ")");
  }
  if (stored->step >= step) {
    throw OrderingError("ast_reuse: output from step " +
                        std::to_string(stored->step) + " cannot serve step " +
                        std::to_string(step));
  }
  return stored->value;
}

void asc_store(CacheState& cache, int layer, int step, const Tensor& output) {
  cache.set_cond_output(layer, output, step);
}

Tensor asc_reuse(const CacheState& cache, int layer, int step) {
  const auto& stored = cache.cond_output(layer);
  if (!stored || stored->step != step) {
    throw OrderingError("asc_reuse: conditional output for layer " +
                        std::to_string(layer) + " at step " +
                        std::to_string(step) + " has not been computed");
  }
  return stored->value;
}

}  // namespace attnshare
