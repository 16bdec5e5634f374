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

#include "attnshare/cost_model.h"

#include <cstdio>
#include <iomanip>
#include <ostream>

#include "attnshare/errors.h"
#include "json.hpp"

namespace attnshare {

uint64_t full_attention_flops(const AttentionConfig& cfg) {
  const auto l = static_cast<uint64_t>(cfg.seq_len);
  return 4ULL * static_cast<uint64_t>(cfg.num_heads) * l * l *
         static_cast<uint64_t>(cfg.head_dim);
}

uint64_t window_attention_flops(const AttentionConfig& cfg) {
  return 4ULL * static_cast<uint64_t>(cfg.num_heads) *
         static_cast<uint64_t>(band_sum(cfg)) *
         static_cast<uint64_t>(cfg.head_dim);
}

uint64_t attn_flops(AttnAction action, const AttentionConfig& cfg) {
  switch (action) {
    case AttnAction::kFull:
      return full_attention_flops(cfg);
    case AttnAction::kWarsRefresh:
      return full_attention_flops(cfg) + window_attention_flops(cfg);
    case AttnAction::kWarsReuse:
      return window_attention_flops(cfg);
    case AttnAction::kAstReuse:
    case AttnAction::kAscReuse:
      return 0;
  }
  return 0;
}

uint64_t attn_flops(Strategy strategy, Branch branch, const AttentionConfig& cfg,
                    bool refresh) {
  const bool window = strategy == Strategy::kWars ||
                      (strategy == Strategy::kWarsAsc && branch == Branch::kCond);
  const bool cross_branch =
      branch == Branch::kUncond &&
      (strategy == Strategy::kAsc || strategy == Strategy::kWarsAsc);
  if (strategy == Strategy::kAst) return attn_flops(AttnAction::kAstReuse, cfg);
  if (cross_branch) return attn_flops(AttnAction::kAscReuse, cfg);
  if (window) {
    return attn_flops(refresh ? AttnAction::kWarsRefresh : AttnAction::kWarsReuse,
                      cfg);
  }
  return attn_flops(AttnAction::kFull, cfg);
}

void CostReport::add(const CostEntry& entry) {
  entries_.push_back(entry);
  total_ += entry.flops;
  baseline_ += entry.baseline_flops;
  subtotals_[entry.strategy] += entry.flops;
}

void CostReport::merge(const CostReport& other) {
  for (const auto& e : other.entries_) add(e);
}

double CostReport::fraction() const {
  if (baseline_ == 0) return 0.0;
  return static_cast<double>(total_) / static_cast<double>(baseline_);
}

std::string CostReport::fraction_string() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", fraction());
  return buf;
}

uint64_t CostReport::step_flops(int step) const {
  uint64_t sum = 0;
  for (const auto& e : entries_) {
    if (e.step == step) sum += e.flops;
  }
  return sum;
}

uint64_t CostReport::step_baseline_flops(int step) const {
  uint64_t sum = 0;
  for (const auto& e : entries_) {
    if (e.step == step) sum += e.baseline_flops;
  }
  return sum;
}

bool CostReport::operator==(const CostReport& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.step != b.step || a.layer != b.layer || a.branch != b.branch ||
        a.strategy != b.strategy || a.action != b.action ||
        a.flops != b.flops || a.baseline_flops != b.baseline_flops) {
      return false;
    }
  }
  return true;
}

std::string CostReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["total_flops"] = total_;
  doc["baseline_flops"] = baseline_;
  doc["fraction"] = fraction();
  doc["fraction_4dp"] = fraction_string();
  nlohmann::ordered_json subtotals = nlohmann::ordered_json::object();
  for (const auto& [s, f] : subtotals_) {
    subtotals[std::string(strategy_token(s))] = f;
  }
  doc["strategy_subtotals"] = std::move(subtotals);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json r;
    r["step"] = e.step;
    r["layer"] = e.layer;
    r["branch"] = std::string(branch_token(e.branch));
    r["strategy"] = std::string(strategy_token(e.strategy));
    r["action"] = std::string(action_token(e.action));
    r["flops"] = e.flops;
    r["baseline_flops"] = e.baseline_flops;
    rows.push_back(std::move(r));
  }
  doc["entries"] = std::move(rows);
  return doc.dump(2) + "\n";
}

void CostReport::print_table(std::ostream& os) const {
  os << std::left << std::setw(6) << "step" << std::setw(7) << "layer"
     << std::setw(8) << "branch" << std::setw(10) << "strategy"
     << std::right << std::setw(14) << "flops" << std::setw(10) << "fraction"
     << "\n";
  for (const auto& e : entries_) {
    const double f = e.baseline_flops == 0
                         ? 0.0
                         : static_cast<double>(e.flops) /
                               static_cast<double>(e.baseline_flops);
    os << std::left << std::setw(6) << e.step << std::setw(7) << e.layer
       << std::setw(8) << branch_token(e.branch) << std::setw(10)
       << strategy_token(e.strategy) << std::right << std::setw(14) << e.flops
       << std::setw(10) << std::fixed << std::setprecision(4) << f << "\n";
  }
  os << "total_flops: " << total_ << "\n";
  os << "baseline_flops: " << baseline_ << "\n";
  for (const auto& [s, f] : subtotals_) {
    os << "subtotal " << strategy_token(s) << ": " << f << "\n";
  }
  os << "fraction: " << fraction_string() << "\n";
}

CostReport aggregate(const CompressionPlan& plan, const ModelConfig& cfg,
                     int step_begin, int step_end) {
  require_valid_plan(plan, cfg);
  if (step_end < 0) step_end = cfg.num_steps;
  if (step_begin < 0 || step_begin > step_end || step_end > cfg.num_steps) {
    throw DimensionError("aggregate: bad step range");
  }
  const AttentionConfig attn = cfg.attention();
  const uint64_t baseline = full_attention_flops(attn);
  const ActionSchedule schedule(plan, cfg.num_steps, cfg.num_layers);
  CostReport report;
  // Same visiting order as the sampler: per step, conditional pass first.
  for (int t = step_begin; t < step_end; ++t) {
    for (Branch b : {Branch::kCond, Branch::kUncond}) {
      for (int layer = 0; layer < cfg.num_layers; ++layer) {
        const AttnAction action = schedule.at(t, layer, b).action;
        report.add({t, layer, b, plan.at(t, layer), action,
                    attn_flops(action, attn), baseline});
      }
    }
  }
  return report;
}

}  // namespace attnshare
