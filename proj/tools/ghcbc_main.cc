// Copyright 2026 The GHCBC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: gen-demos, train, eval, replay, ablate, plot.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ghcbc/config.h"
#include "ghcbc/dataset.h"
#include "ghcbc/errors.h"
#include "ghcbc/plot.h"
#include "ghcbc/runtime.h"
#include "ghcbc/trainer.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonFlags {
  std::string config;
  std::string profile;
  std::string out;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_set = false;
};

void AddCommon(CLI::App* cmd, CommonFlags& f, bool needs_out) {
  cmd->add_option("--config", f.config, "YAML config file");
  cmd->add_option("--profile", f.profile, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  auto* out = cmd->add_option("--out", f.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--set", f.overrides, "override, key=value (repeatable)");
  cmd->add_option_function<uint64_t>(
      "--seed",
      [&f](const uint64_t& s) {
        f.seed = s;
        f.seed_set = true;
      },
      "seed for every stochastic component");
}

ghcbc::RunConfig Resolve(const CommonFlags& f, const fs::path& fallback = {}) {
  fs::path path = f.config;
  if (path.empty() && !fallback.empty() && fs::exists(fallback)) path = fallback;
  ghcbc::RunConfig config = ghcbc::LoadRunConfig(path, f.profile, f.overrides);
  if (f.seed_set) config.Set("seed", std::to_string(f.seed));
  config.Validate();
  return config;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ghcbc::IoError("cannot write " + path.string());
  out << text;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ghcbc::IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void RequireDataset(const fs::path& dir) {
  if (!fs::exists(dir / ghcbc::kManifestName)) {
    throw ghcbc::IoError("dataset manifest not found: " +
                         (dir / ghcbc::kManifestName).string());
  }
}

int GenDemos(const CommonFlags& f) {
  ghcbc::RunConfig config = Resolve(f);
  if (f.seed_set) config.demo_seed = f.seed;
  const auto episodes =
      ghcbc::GenerateDemos(config.world, config.demo_seed, config.demo_count);
  ghcbc::WriteDataset(f.out, episodes, config.profile);
  std::cout << "wrote " << episodes.size() << " episodes to " << f.out << "\n";
  return 0;
}

ghcbc::TrainResult TrainOne(ghcbc::RunConfig config,
                            const std::vector<ghcbc::Episode>& episodes,
                            const fs::path& out) {
  if (config.model.action_mean.empty()) {
    ghcbc::SetActionStats(config.model, episodes, config.world.arm);
  }
  fs::create_directories(out);
  WriteText(out / "config.yaml", config.ToYaml());
  ghcbc::GhcbcModel model(config.model, config.seed);
  ghcbc::TrainConfig train = config.train;
  train.seed = config.seed;
  auto result = ghcbc::TrainLoop(model, episodes, train, config.world, out);
  for (const auto& row : result.metrics) {
    std::cout << row.ToJson() << "\n";
  }
  return result;
}

int Train(const CommonFlags& f, const std::string& data) {
  const ghcbc::RunConfig config = Resolve(f);
  RequireDataset(data);
  const auto episodes = ghcbc::ReadDataset(data);
  const auto result = TrainOne(config, episodes, f.out);
  std::cout << "best success " << result.best_success << " at step "
            << result.best_step << "\n";
  return 0;
}

int Eval(const CommonFlags& f, const std::string& checkpoint, bool expert,
         int episodes) {
  if (checkpoint.empty() && !expert) {
    throw ghcbc::ConfigError("eval needs --checkpoint or --expert");
  }
  const fs::path ckpt = checkpoint;
  ghcbc::RunConfig config =
      Resolve(f, ckpt.empty() ? fs::path() : ckpt.parent_path() / "config.yaml");
  if (episodes > 0) config.train.eval_episodes = episodes;
  const auto seeds =
      ghcbc::sim::SeedRange(config.train.eval_seed, config.train.eval_episodes);

  ghcbc::sim::EvaluationResult result;
  if (expert) {
    const auto world = config.world;
    result = ghcbc::sim::Evaluate(
        world, [&] { return std::make_unique<ghcbc::sim::ExpertAgent>(world); },
        seeds, config.train.eval_workers);
  } else {
    if (!fs::exists(ckpt)) {
      throw ghcbc::IoError("checkpoint not found: " + ckpt.string());
    }
    ghcbc::GhcbcModel model(config.model, config.seed);
    ghcbc::LoadCheckpoint(model.parameters(), ckpt);
    result = ghcbc::EvaluateModel(model, config.world, config.train, seeds);
  }

  nlohmann::json summary;
  summary["success_rate"] = result.success_rate;
  summary["policy"] = expert ? "expert" : ckpt.string();
  for (const auto& e : result.episodes) {
    summary["episodes"].push_back({{"seed", e.seed},
                                   {"success", e.success},
                                   {"gripper_transitions",
                                    e.gripper_transitions}});
  }
  if (!f.out.empty()) {
    const fs::path out = f.out;
    fs::create_directories(out / "traces");
    WriteText(out / "eval.json", summary.dump(2) + "\n");
    for (const auto& e : result.episodes) {
      if (e.trace.empty()) continue;
      WriteText(out / "traces" / ("episode_" + std::to_string(e.seed) + ".jsonl"),
                e.trace);
    }
  }
  std::cout << "success rate " << result.success_rate << " over "
            << result.episodes.size() << " episodes\n";
  return 0;
}

int Replay(const CommonFlags& f, const std::vector<std::string>& traces) {
  const ghcbc::RunConfig config = Resolve(f);
  const ghcbc::RuntimeConfig runtime = ghcbc::RuntimeConfigFor(
      config.model, config.world, config.train.ensemble);
  size_t total = 0;
  for (const auto& path : traces) {
    const auto records = ghcbc::ParseTrace(ReadText(path));
    const auto violations = ghcbc::CheckTrace(records, runtime);
    for (const auto& v : violations) std::cout << path << ": " << v << "\n";
    std::cout << path << ": " << records.size() << " steps, "
              << violations.size() << " violations\n";
    total += violations.size();
  }
  return total == 0 ? 0 : kExitRuntime;
}

int Ablate(const CommonFlags& f, const std::string& data,
           const std::vector<int>& rows) {
  const ghcbc::RunConfig base = Resolve(f);
  RequireDataset(data);
  const auto episodes = ghcbc::ReadDataset(data);
  const fs::path out = f.out;
  fs::create_directories(out);
  std::ostringstream table;
  table << "| row | gc | input pose | output pose | trainer | best success | "
           "final success |\n|---|---|---|---|---|---|---|\n";
  for (int row : rows) {
    ghcbc::RunConfig config = base;
    config.model.ablation = ghcbc::AblationConfig::TableRow(row);
    config.model.action_mean.clear();
    config.model.action_scale.clear();
    config.model.ablation.clear_on_transition =
        base.model.ablation.clear_on_transition;
    config.Validate();
    std::cout << "row " << row << "\n";
    const auto result =
        TrainOne(config, episodes, out / ("row" + std::to_string(row)));
    const auto& a = config.model.ablation;
    table << "| " << row << " | " << (a.gc_enabled ? "yes" : "no") << " | "
          << ghcbc::ToString(a.input_pose_mode) << " | "
          << ghcbc::ToString(a.pose_output) << " | "
          << ghcbc::ToString(a.hc_mode) << " | " << result.best_success
          << " | " << result.metrics.back().success << " |\n";
  }
  WriteText(out / "ablation.md", table.str());
  std::cout << table.str();
  return 0;
}

int Plot(const CommonFlags& f, const std::string& metrics) {
  if (!fs::exists(metrics)) {
    throw ghcbc::IoError("metrics log not found: " + metrics);
  }
  const auto rows = ghcbc::ReadMetrics(metrics);
  for (const auto& p : ghcbc::PlotMetrics(rows, f.out)) {
    std::cout << "wrote " << p.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-chunking behavior cloning for a planar desk arm"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, eval_f, replay_f, ablate_f, plot_f;
  std::string train_data, ablate_data, checkpoint, metrics;
  std::vector<std::string> traces;
  std::vector<int> rows = {1, 4, 5, 6, 7};
  bool expert = false;
  int episodes = 0;

  auto* gen = app.add_subcommand("gen-demos", "generate expert demonstrations");
  AddCommon(gen, gen_f, true);

  auto* train = app.add_subcommand("train", "train a policy");
  AddCommon(train, train_f, true);
  train->add_option("--data", train_data, "dataset directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or the expert");
  AddCommon(eval, eval_f, false);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file");
  eval->add_flag("--expert", expert, "evaluate the scripted expert");
  eval->add_option("--episodes", episodes, "override train.eval_episodes");

  auto* replay = app.add_subcommand("replay", "check rollout traces");
  AddCommon(replay, replay_f, false);
  replay->add_option("traces", traces, "trace files")->required();

  auto* ablate = app.add_subcommand("ablate", "train and compare ablation rows");
  AddCommon(ablate, ablate_f, true);
  ablate->add_option("--data", ablate_data, "dataset directory")->required();
  ablate->add_option("--rows", rows, "ablation table rows")
      ->delimiter(',')
      ->check(CLI::Range(1, 7));

  auto* plot = app.add_subcommand("plot", "plot a metrics log as SVG");
  AddCommon(plot, plot_f, true);
  plot->add_option("--metrics", metrics, "metrics.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return GenDemos(gen_f);
    if (*train) return Train(train_f, train_data);
    if (*eval) return Eval(eval_f, checkpoint, expert, episodes);
    if (*replay) return Replay(replay_f, traces);
    if (*ablate) return Ablate(ablate_f, ablate_data, rows);
    if (*plot) return Plot(plot_f, metrics);
  } catch (const ghcbc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
