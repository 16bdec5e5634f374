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

#include "attnshare/cli.h"

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "attnshare/config.h"
#include "attnshare/cost_model.h"
#include "attnshare/errors.h"
#include "attnshare/metrics.h"
#include "attnshare/model.h"
#include "attnshare/plan_search.h"
#include "json.hpp"

namespace attnshare {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

class IoError : public Error {
 public:
  using Error::Error;
};

struct CommonFlags {
  ModelConfig model;
  int class_id = 0;
  std::string out_dir;
};

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--layers", f.model.num_layers, "transformer layers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--steps", f.model.num_steps, "denoising steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seqlen", f.model.seq_len, "tokens per latent")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--heads", f.model.num_heads, "attention heads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--head-dim", f.model.head_dim, "per-head width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--window-frac", f.model.window_frac,
                  "window width as a fraction of seqlen")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--guidance", f.model.guidance_scale, "guidance scale")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--seed", f.model.seed, "seed for weights and latent")
      ->capture_default_str();
  cmd->add_option("--class", f.class_id, "class label for the conditional pass")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

ordered_json config_json(const ModelConfig& m, int class_id) {
  ordered_json j;
  j["layers"] = m.num_layers;
  j["steps"] = m.num_steps;
  j["seqlen"] = m.seq_len;
  j["heads"] = m.num_heads;
  j["head_dim"] = m.head_dim;
  j["mlp_ratio"] = m.mlp_ratio;
  j["window_frac"] = m.window_frac;
  j["window_width"] = m.window_width();
  j["guidance"] = m.guidance_scale;
  j["seed"] = m.seed;
  j["class"] = class_id;
  j["config_hash"] = m.hash();
  return j;
}

ordered_json cost_summary(const CostReport& r) {
  ordered_json j;
  j["total_flops"] = r.total_flops();
  j["baseline_flops"] = r.baseline_flops();
  j["fraction"] = r.fraction();
  j["fraction_4dp"] = r.fraction_string();
  return j;
}

void write_manifest(const fs::path& dir, std::string_view command,
                    ordered_json body) {
  ordered_json doc;
  doc["tool"] = "attnshare";
  doc["version"] = std::string(kToolVersion);
  doc["command"] = std::string(command);
  for (auto& [k, v] : body.items()) doc[k] = v;
  write_file_atomic(dir / "manifest.json", doc.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void check_class(const CommonFlags& f) {
  if (f.class_id >= f.model.num_classes) {
    throw ConfigError("--class must be < " + std::to_string(f.model.num_classes));
  }
}

int cmd_search(const CommonFlags& f, double delta, std::ostream& out) {
  check_class(f);
  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  const ModelConfig& cfg = f.model;
  auto t0 = std::chrono::steady_clock::now();
  const ToyDiT model = ToyDiT::init(cfg);
  const double init_s = seconds_since(t0);

  SearchConfig scfg;
  scfg.delta = delta;
  scfg.class_id = f.class_id;
  SearchStats stats;
  const CompressionPlan plan = search(model, cfg, scfg, &stats);
  const CostReport cost = aggregate(plan, cfg);

  write_file_atomic(dir / "plan.json", plan_to_json(plan));
  write_file_atomic(dir / "cost.json", cost.to_json());
  write_file_atomic(dir / "heatmap.csv", plan_heatmap_csv(plan));

  ordered_json body;
  body["config"] = config_json(cfg, f.class_id);
  ordered_json s;
  s["delta"] = delta;
  ordered_json list = ordered_json::array();
  for (Strategy st : scfg.strategies) list.push_back(std::string(strategy_token(st)));
  s["strategies"] = list;
  s["loss"] = "mrae";
  s["reference_evaluations"] = stats.reference_evaluations;
  s["candidate_evaluations"] = stats.candidate_evaluations;
  body["search"] = s;
  body["plan_hash"] = plan_hash(plan);
  body["cost"] = cost_summary(cost);
  body["artifacts"] = {{"plan", "plan.json"},
                       {"cost", "cost.json"},
                       {"heatmap", "heatmap.csv"}};
  body["wall_seconds"] = {{"init", init_s}, {"search", stats.seconds}};
  write_manifest(dir, "search", body);

  out << "plan entries: " << plan.num_entries() << "\n";
  out << "fraction: " << cost.fraction_string() << "\n";
  return kExitOk;
}

int cmd_generate(const CommonFlags& f, const std::string& plan_path,
                 std::ostream& out, std::ostream& err) {
  check_class(f);
  const ModelConfig& cfg = f.model;
  CompressionPlan plan = full_plan(cfg);
  if (!plan_path.empty()) plan = plan_from_json(read_file(plan_path));
  const auto violations = validate_plan(plan, cfg);
  if (!violations.empty()) {
    err << "plan does not fit the model config:\n";
    for (const auto& v : violations) err << "  " << to_string(v) << "\n";
    return kExitFailure;
  }
  const fs::path dir(f.out_dir);
  ensure_dir(dir);

  auto t0 = std::chrono::steady_clock::now();
  const ToyDiT model = ToyDiT::init(cfg);
  const double init_s = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const SampleResult result = sample(model, cfg, plan, f.class_id);
  const double sample_s = seconds_since(t0);

  const std::string hash = plan_hash(plan);
  write_latent_dump(dir / "latent.bin", result.latent, cfg.seed, hash);
  write_file_atomic(dir / "cost.json", result.cost.to_json());

  ordered_json body;
  body["config"] = config_json(cfg, f.class_id);
  body["plan"] = plan_path.empty() ? "(full)" : plan_path;
  body["plan_hash"] = hash;
  body["cost"] = cost_summary(result.cost);
  body["artifacts"] = {{"latent", "latent.bin"}, {"cost", "cost.json"}};
  body["wall_seconds"] = {{"init", init_s}, {"sample", sample_s}};
  write_manifest(dir, "generate", body);

  out << "fraction: " << result.cost.fraction_string() << "\n";
  return kExitOk;
}

int cmd_analyze(const CommonFlags& f, std::ostream& out) {
  check_class(f);
  const ModelConfig& cfg = f.model;
  const fs::path dir(f.out_dir);
  ensure_dir(dir);
  auto t0 = std::chrono::steady_clock::now();
  const ToyDiT model = ToyDiT::init(cfg);
  const SampleResult result =
      sample(model, cfg, full_plan(cfg), f.class_id, /*trace=*/true);
  const double sample_s = seconds_since(t0);

  ordered_json files = ordered_json::array();
  for (const auto& m : similarity_report(result.traces, SimilarityMode::kStepWise)) {
    const std::string name = "sim_step_layer" + std::to_string(m.layer) + ".csv";
    write_file_atomic(dir / name, m.to_csv());
    files.push_back(name);
  }
  for (const auto& m : similarity_report(result.traces, SimilarityMode::kCfgWise)) {
    const std::string name = "sim_cfg_layer" + std::to_string(m.layer) + ".csv";
    write_file_atomic(dir / name, m.to_csv());
    files.push_back(name);
  }
  ordered_json body;
  body["config"] = config_json(cfg, f.class_id);
  body["artifacts"] = {{"similarity", files}};
  body["wall_seconds"] = {{"traced_sample", sample_s}};
  write_manifest(dir, "analyze", body);
  out << "wrote " << files.size() << " similarity files to " << dir.string()
      << "\n";
  return kExitOk;
}

int cmd_cost(CommonFlags f, const std::string& plan_path, std::ostream& out,
             std::ostream& err) {
  const CompressionPlan plan = plan_from_json(read_file(plan_path));
  // Grid size comes from the plan itself.
  f.model.num_steps = plan.meta.steps;
  f.model.num_layers = plan.meta.layers;
  try {
    f.model.validate();
  } catch (const ConfigError& e) {
    err << "plan meta: " << e.what() << "\n";
    return kExitFailure;
  }
  const CostReport report = aggregate(plan, f.model);
  if (!f.out_dir.empty()) {
    ensure_dir(f.out_dir);
    write_file_atomic(fs::path(f.out_dir) / "cost.json", report.to_json());
  }
  report.print_table(out);
  return kExitOk;
}

}  // namespace

std::string plan_hash(const CompressionPlan& plan) {
  return hex64(fnv1a64(plan_to_json(plan)));
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_latent_dump(const fs::path& path, const Tensor& latent,
                       uint64_t seed, const std::string& hash) {
  ordered_json header;
  header["shape"] = latent.shape();
  header["seed"] = seed;
  header["plan_hash"] = hash;
  std::string bytes = header.dump() + "\n";
  const size_t offset = bytes.size();
  bytes.resize(offset + latent.size() * sizeof(float));
  for (size_t i = 0; i < latent.size(); ++i) {
    uint32_t bits = std::bit_cast<uint32_t>(latent[i]);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    std::memcpy(bytes.data() + offset + i * sizeof(float), &bits, sizeof(bits));
  }
  write_file_atomic(path, bytes);
}

LatentDump read_latent_dump(const fs::path& path) {
  const std::string bytes = read_file(path);
  const size_t nl = bytes.find('\n');
  if (nl == std::string::npos) throw IoError("latent dump: missing header line");
  LatentDump dump;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(0, nl));
    dump.shape = header.at("shape").get<Shape>();
    dump.seed = header.at("seed").get<uint64_t>();
    dump.plan_hash = header.at("plan_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("latent dump header: ") + e.what());
  }
  const auto n = static_cast<size_t>(shape_numel(dump.shape));
  if (bytes.size() - nl - 1 != n * sizeof(float)) {
    throw IoError("latent dump: payload size does not match shape");
  }
  std::vector<float> data(n);
  for (size_t i = 0; i < n; ++i) {
    uint32_t bits;
    std::memcpy(&bits, bytes.data() + nl + 1 + i * sizeof(float), sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    data[i] = std::bit_cast<float>(bits);
  }
  dump.latent = Tensor(dump.shape, std::move(data));
  return dump;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Attention-compression toolkit for a toy diffusion transformer",
               "attnshare"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonFlags search_f, gen_f, analyze_f, cost_f;
  double delta = 0.05;
  std::string gen_plan, cost_plan;
  bool gen_full = false;

  auto* search_cmd = app.add_subcommand("search", "greedy compression-plan search");
  add_model_flags(search_cmd, search_f);
  search_cmd->add_option("--delta", delta, "loss threshold at the last layer")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  search_cmd->add_option("--out", search_f.out_dir, "output directory")->required();

  auto* gen_cmd = app.add_subcommand("generate", "run guided sampling under a plan");
  add_model_flags(gen_cmd, gen_f);
  auto* plan_opt = gen_cmd->add_option("--plan", gen_plan, "plan JSON");
  auto* full_opt = gen_cmd->add_flag("--full", gen_full, "uncompressed run");
  plan_opt->excludes(full_opt);
  gen_cmd->add_option("--out", gen_f.out_dir, "output directory")->required();

  auto* analyze_cmd =
      app.add_subcommand("analyze", "attention-output similarity across steps and passes");
  add_model_flags(analyze_cmd, analyze_f);
  analyze_cmd->add_option("--out", analyze_f.out_dir, "output directory")->required();

  auto* cost_cmd = app.add_subcommand("cost", "attention FLOPs of a plan");
  add_model_flags(cost_cmd, cost_f);
  cost_cmd->add_option("--plan", cost_plan, "plan JSON")->required();
  cost_cmd->add_option("--out", cost_f.out_dir, "directory for cost.json");

  std::vector<const char*> argv{"attnshare"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (gen_cmd->parsed() && !gen_full && gen_plan.empty()) {
      throw CLI::RequiredError("generate needs --plan <path> or --full");
    }
  } catch (const CLI::CallForHelp&) {
    const CLI::App* which = &app;
    for (const CLI::App* sub : {search_cmd, gen_cmd, analyze_cmd, cost_cmd}) {
      if (sub->parsed()) which = sub;
    }
    out << which->help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (search_cmd->parsed()) return cmd_search(search_f, delta, out);
    if (gen_cmd->parsed()) return cmd_generate(gen_f, gen_plan, out, err);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_f, out);
    if (cost_cmd->parsed()) return cmd_cost(cost_f, cost_plan, out, err);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace attnshare
