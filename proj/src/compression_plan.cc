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

#include "attnshare/compression_plan.h"

#include <optional>
#include <sstream>

#include "attnshare/errors.h"
#include "json.hpp"

namespace attnshare {

using ordered_json = nlohmann::ordered_json;

CompressionPlan::CompressionPlan(int steps, int layers) {
  meta.steps = steps;
  meta.layers = layers;
}

Strategy CompressionPlan::at(int step, int layer) const {
  auto it = entries_.find({step, layer});
  return it == entries_.end() ? Strategy::kFull : it->second;
}

void CompressionPlan::set(int step, int layer, Strategy s) {
  if (s == Strategy::kFull) {
    entries_.erase({step, layer});
  } else {
    entries_[{step, layer}] = s;
  }
}

bool CompressionPlan::operator==(const CompressionPlan& other) const {
  return entries_ == other.entries_ && meta.delta == other.meta.delta &&
         meta.seed == other.meta.seed && meta.steps == other.meta.steps &&
         meta.layers == other.meta.layers &&
         meta.wars_refresh_interval == other.meta.wars_refresh_interval;
}

CompressionPlan full_plan(const ModelConfig& cfg) {
  CompressionPlan plan(cfg.num_steps, cfg.num_layers);
  plan.meta.seed = cfg.seed;
  return plan;
}

std::string to_string(const PlanViolation& v) {
  std::ostringstream os;
  if (v.step >= 0) os << "step " << v.step << ", layer " << v.layer << ": ";
  os << v.reason;
  return os.str();
}

std::vector<PlanViolation> validate_plan(const CompressionPlan& plan,
                                         const ModelConfig& cfg) {
  std::vector<PlanViolation> out;
  if (plan.meta.steps != cfg.num_steps) {
    out.push_back({-1, -1,
                   "plan has " + std::to_string(plan.meta.steps) +
                       " steps, config has " + std::to_string(cfg.num_steps)});
  }
  if (plan.meta.layers != cfg.num_layers) {
    out.push_back({-1, -1,
                   "plan has " + std::to_string(plan.meta.layers) +
                       " layers, config has " +
                       std::to_string(cfg.num_layers)});
  }
  if (plan.meta.wars_refresh_interval < 0) {
    out.push_back({-1, -1, "negative wars_refresh_interval"});
  }
  for (const auto& [key, strategy] : plan.entries()) {
    const auto [step, layer] = key;
    if (step < 0 || step >= cfg.num_steps || layer < 0 ||
        layer >= cfg.num_layers) {
      out.push_back({step, layer, "entry outside the step/layer grid"});
      continue;
    }
    // Every evaluation other than a step-reuse stores its output, so a
    // step-reuse is servable from step 1 on.
    if (strategy == Strategy::kAst && step == 0) {
      out.push_back({step, layer, "ast: no cached output"});
    }
  }
  return out;
}

void require_valid_plan(const CompressionPlan& plan, const ModelConfig& cfg) {
  auto violations = validate_plan(plan, cfg);
  if (violations.empty()) return;
  std::string msg = "infeasible plan:";
  for (const auto& v : violations) msg += "\n  " + to_string(v);
  throw PlanError(msg);
}

std::string plan_to_json(const CompressionPlan& plan) {
  ordered_json meta;
  meta["delta"] = plan.meta.delta;
  meta["seed"] = plan.meta.seed;
  meta["steps"] = plan.meta.steps;
  meta["layers"] = plan.meta.layers;
  if (plan.meta.wars_refresh_interval != 0) {
    meta["wars_refresh_interval"] = plan.meta.wars_refresh_interval;
  }
  ordered_json entries = ordered_json::array();
  for (const auto& [key, strategy] : plan.entries()) {
    ordered_json e;
    e["step"] = key.first;
    e["layer"] = key.second;
    e["strategy"] = std::string(strategy_token(strategy));
    entries.push_back(std::move(e));
  }
  ordered_json doc;
  doc["meta"] = std::move(meta);
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

CompressionPlan plan_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw PlanError("plan JSON parse error at byte " + std::to_string(e.byte) +
                    ": " + e.what());
  }
  try {
    const auto& meta = doc.at("meta");
    CompressionPlan plan(meta.at("steps").get<int>(),
                         meta.at("layers").get<int>());
    plan.meta.delta = meta.at("delta").get<double>();
    plan.meta.seed = meta.at("seed").get<uint64_t>();
    if (meta.contains("wars_refresh_interval")) {
      plan.meta.wars_refresh_interval =
          meta.at("wars_refresh_interval").get<int>();
    }
    const auto& entries = doc.at("entries");
    if (!entries.is_array()) throw PlanError("plan JSON: entries must be an array");
    for (const auto& e : entries) {
      const int step = e.at("step").get<int>();
      const int layer = e.at("layer").get<int>();
      const Strategy s = parse_strategy(e.at("strategy").get<std::string>());
      if (plan.entries().count({step, layer}) != 0) {
        throw PlanError("plan JSON: duplicate entry for step " +
                        std::to_string(step) + ", layer " +
                        std::to_string(layer));
      }
      plan.set(step, layer, s);
    }
    return plan;
  } catch (const ordered_json::exception& e) {
    throw PlanError(std::string("plan JSON schema error: ") + e.what());
  }
}

std::string plan_heatmap_csv(const CompressionPlan& plan) {
  std::ostringstream os;
  os << "layer";
  for (int t = 0; t < plan.meta.steps; ++t) os << "," << t;
  os << "\n";
  for (int i = 0; i < plan.meta.layers; ++i) {
    os << i;
    for (int t = 0; t < plan.meta.steps; ++t) {
      os << "," << strategy_token(plan.at(t, i));
    }
    os << "\n";
  }
  return os.str();
}

std::string_view action_token(AttnAction a) {
  switch (a) {
    case AttnAction::kFull:
      return "full";
    case AttnAction::kWarsRefresh:
      return "wars_refresh";
    case AttnAction::kWarsReuse:
      return "wars_reuse";
    case AttnAction::kAstReuse:
      return "ast_reuse";
    case AttnAction::kAscReuse:
      return "asc_reuse";
  }
  return "?";
}

namespace {

enum class Kind { kFull, kWindow, kReuse };

Kind kind_of(Strategy s, Branch b) {
  switch (s) {
    case Strategy::kAst:
      return Kind::kReuse;
    case Strategy::kAsc:
      return b == Branch::kUncond ? Kind::kReuse : Kind::kFull;
    case Strategy::kWarsAsc:
      return b == Branch::kUncond ? Kind::kReuse : Kind::kWindow;
    case Strategy::kWars:
      return Kind::kWindow;
    case Strategy::kFull:
      break;
  }
  return Kind::kFull;
}

}  // namespace

ActionSchedule::ActionSchedule(const CompressionPlan& plan, int steps,
                               int layers, Options options)
    : steps_(steps),
      layers_(layers),
      actions_(static_cast<size_t>(steps) * layers * kNumBranches) {
  const int interval = plan.meta.wars_refresh_interval;
  auto within_interval = [interval](int from, int to) {
    return interval == 0 || to - from < interval;
  };
  for (int layer = 0; layer < layers; ++layer) {
    for (Branch b : {Branch::kCond, Branch::kUncond}) {
      std::vector<Kind> kinds(static_cast<size_t>(steps));
      for (int t = 0; t < steps; ++t) kinds[t] = kind_of(plan.at(t, layer), b);

      std::optional<int> last_refresh;
      for (int t = 0; t < steps; ++t) {
        const Strategy s = plan.at(t, layer);
        LayerAction& a =
            actions_[(static_cast<size_t>(t) * layers + layer) * kNumBranches +
                     static_cast<int>(b)];
        a.store_for_asc = b == Branch::kCond &&
                          (s == Strategy::kAsc || s == Strategy::kWarsAsc);
        switch (kinds[t]) {
          case Kind::kReuse:
            a.action = s == Strategy::kAst ? AttnAction::kAstReuse
                                           : AttnAction::kAscReuse;
            break;
          case Kind::kWindow:
            if (last_refresh && within_interval(*last_refresh, t)) {
              a.action = AttnAction::kWarsReuse;
            } else {
              a.action = AttnAction::kWarsRefresh;
              last_refresh = t;
            }
            break;
          case Kind::kFull: {
            bool refresh = options.refresh_on_full;
            if (!refresh) {
              for (int n = t + 1; n < steps; ++n) {
                if (kinds[n] == Kind::kReuse) continue;
                refresh = kinds[n] == Kind::kWindow && within_interval(t, n);
                break;
              }
            }
            a.action = refresh ? AttnAction::kWarsRefresh : AttnAction::kFull;
            if (refresh) last_refresh = t;
            break;
          }
        }
      }
    }
  }
}

const LayerAction& ActionSchedule::at(int step, int layer, Branch b) const {
  if (step < 0 || step >= steps_ || layer < 0 || layer >= layers_) {
    throw DimensionError("schedule: (" + std::to_string(step) + ", " +
                         std::to_string(layer) + ") out of range");
  }
  return actions_[(static_cast<size_t>(step) * layers_ + layer) *
                      kNumBranches +
                  static_cast<int>(b)];
}

}  // namespace attnshare
