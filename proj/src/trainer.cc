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

#include "ghcbc/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ghcbc/errors.h"

namespace ghcbc {

void TrainConfig::Validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (steps < 0) throw ConfigError("steps must be non-negative");
  if (eval_every < 1) throw ConfigError("eval_every must be positive");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be positive");
  if (eval_workers < 1) throw ConfigError("eval_workers must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(ensemble.m >= 0.0)) throw ConfigError("ensemble m must be >= 0");
}

ReferenceReplay ReplayReferences(const Episode& episode, int t,
                                 double close_threshold,
                                 double open_threshold) {
  if (t < 0 || t >= episode.length()) {
    throw DatasetError("step " + std::to_string(t) + " outside episode of " +
                       std::to_string(episode.length()));
  }
  ReferenceReplay replay;
  replay.joint = episode.joints[0];
  replay.ee = episode.ees[0];
  GripperState gripper;
  for (int s = 0; s < t; ++s) {
    const GripperState next = GripperHysteresis(
        episode.actions[s].back(), gripper, close_threshold, open_threshold);
    if (next.value != gripper.value) {
      replay.joint = episode.joints[s];
      replay.ee = episode.ees[s];
      replay.last_transition = s;
    }
    gripper = next;
  }
  replay.gripper_state = gripper.value;
  return replay;
}

int HistoryStart(const Episode& episode, int t, int history_k,
                 bool clear_on_transition, double close_threshold,
                 double open_threshold) {
  int start = std::max(0, t - history_k);
  if (clear_on_transition) {
    const ReferenceReplay r =
        ReplayReferences(episode, t, close_threshold, open_threshold);
    start = std::max(start, r.last_transition + 1);
  }
  return start;
}

Tensor TargetChunk(const Episode& episode, int t, int chunk_k,
                   const sim::ArmConfig& arm, PoseOutput output) {
  const int width = sim::ActionDim(output);
  std::vector<double> data;
  data.reserve(static_cast<size_t>(chunk_k) * width);
  for (int r = 0; r < chunk_k; ++r) {
    const int s = std::min(t + r, episode.length() - 1);
    const auto a = sim::ActionFromJointCommand(arm, episode.actions[s], output);
    data.insert(data.end(), a.begin(), a.end());
  }
  return Tensor::FromVector({chunk_k, width}, std::move(data));
}

void SetActionStats(ModelConfig& config, std::span<const Episode> episodes,
                    const sim::ArmConfig& arm) {
  if (episodes.empty()) throw DatasetError("dataset is empty");
  const PoseOutput output = config.ablation.pose_output;
  const size_t width = static_cast<size_t>(sim::ActionDim(output));
  std::vector<double> sum(width, 0.0), sq(width, 0.0);
  double n = 0.0;
  auto accumulate = [&](std::span<const double> a) {
    for (size_t c = 0; c < width; ++c) {
      sum[c] += a[c];
      sq[c] += a[c] * a[c];
    }
    n += 1.0;
  };
  for (const Episode& e : episodes) {
    if (!config.relative_actions) {
      for (const auto& command : e.actions) {
        accumulate(sim::ActionFromJointCommand(arm, command, output));
      }
      continue;
    }
    // Every chunk row the trainer regresses, relative to its query pose.
    for (int t = 0; t < e.length(); ++t) {
      const auto current = sim::PoseAction(e.joints[t], e.ees[t], output);
      const Tensor chunk =
          TargetChunk(e, t, config.policy.chunk_k, arm, output);
      for (int64_t r = 0; r < chunk.dim(0); ++r) {
        accumulate(sim::RelativeAction(
            chunk.data().subspan(r * width, width), current, output));
      }
    }
  }
  config.action_mean.assign(width, 0.0);
  config.action_scale.assign(width, 1.0);
  for (size_t c = 0; c + 1 < width; ++c) {
    const double mean = sum[c] / n;
    config.action_mean[c] = mean;
    config.action_scale[c] =
        std::max(0.05, std::sqrt(std::max(0.0, sq[c] / n - mean * mean)));
  }
}

TrainSample BuildSample(const GhcbcModel& model,
                        std::span<const Episode> episodes, int episode, int t,
                        const sim::ArmConfig& arm) {
  if (episode < 0 || episode >= static_cast<int>(episodes.size())) {
    throw DatasetError("episode index out of range");
  }
  const Episode& e = episodes[episode];
  if (e.length() < 1) throw DatasetError("episode shorter than one step");
  const ModelConfig& mc = model.config();
  const PolicyConfig& pc = mc.policy;
  const PoseOutput output = mc.ablation.pose_output;

  TrainSample s;
  s.episode = episode;
  s.t = t;
  s.image = e.images[t];
  s.joint = e.joints[t];
  s.ee = e.ees[t];
  const ReferenceReplay ref =
      ReplayReferences(e, t, pc.gripper_close, pc.gripper_open);
  s.tracker.Initialize(e.joints[0], e.ees[0]);
  if (ref.last_transition >= 0) {
    s.tracker.MaybeUpdate(ref.joint, ref.ee, ref.gripper_state);
  }

  s.history = HistoryBuffers(pc.history_k);
  const bool needs_history = mc.ablation.hc_mode == HcMode::kActionOnly ||
                             mc.ablation.hc_mode == HcMode::kActionImage;
  if (needs_history) {
    const int start =
        HistoryStart(e, t, pc.history_k, mc.ablation.clear_on_transition,
                     pc.gripper_close, pc.gripper_open);
    NoGradGuard no_grad;
    for (int h = start; h < t; ++h) {
      VisionTokens tokens;
      if (mc.ablation.hc_mode == HcMode::kActionImage) {
        tokens = model.EncodeImage(e.images[h]);
      } else {
        tokens.tokens = Tensor::Zeros(
            {mc.vision.token_count(), static_cast<int64_t>(pc.d_model)});
      }
      auto action = sim::ActionFromJointCommand(arm, e.actions[h], output);
      GripperState g;
      g.value = 0;
      // Executed actions carry the binary gripper state.
      action.back() = GripperHysteresis(action.back(), g, pc.gripper_close,
                                        pc.gripper_open)
                          .value;
      s.history.Push(std::move(tokens), std::move(action));
    }
  }
  s.target = model.EncodeActions(TargetChunk(e, t, pc.chunk_k, arm, output),
                                 s.joint, s.ee);
  return s;
}

std::vector<TrainSample> SampleBatch(const GhcbcModel& model,
                                     std::span<const Episode> episodes,
                                     int batch_size,
                                     const sim::ArmConfig& arm,
                                     std::mt19937_64& rng) {
  if (episodes.empty()) throw DatasetError("dataset is empty");
  std::vector<TrainSample> batch;
  batch.reserve(batch_size);
  for (int b = 0; b < batch_size; ++b) {
    const int episode = static_cast<int>(rng() % episodes.size());
    const int length = episodes[episode].length();
    if (length < 1) throw DatasetError("episode shorter than one step");
    const int t = static_cast<int>(rng() % static_cast<uint64_t>(length));
    batch.push_back(BuildSample(model, episodes, episode, t, arm));
  }
  return batch;
}

LossComponents TrainStep(GhcbcModel& model, std::span<const TrainSample> batch,
                         AdamState& adam, std::mt19937_64& rng) {
  if (batch.empty()) throw DatasetError("empty batch");
  const double beta = model.config().policy.kl_beta;
  const double scale = 1.0 / static_cast<double>(batch.size());
  model.parameters().ZeroGrad();
  LossComponents loss;
  for (const TrainSample& s : batch) {
    PolicyInput input;
    input.image = &s.image;
    input.joint = s.joint;
    input.ee = s.ee;
    input.tracker = &s.tracker;
    input.history = &s.history;
    input.target_chunk = &s.target;
    PolicyOutput out = model.Forward(input, LatentMode::kTrain, &rng);
    Tensor total = ReconstructionLoss(out.chunk, ActionChunk{s.target});
    const double reconst = total.item();
    double kl = 0.0;
    if (out.latent) {
      Tensor kl_term = KlLoss(*out.latent);
      kl = kl_term.item();
      if (beta != 0.0) total = Add(total, Scale(kl_term, beta));
    }
    loss.reconst += scale * reconst;
    loss.kl += scale * kl;
    loss.total += scale * total.item();
    if (!std::isfinite(total.item())) {
      throw DivergenceError("non-finite loss at step " +
                            std::to_string(adam.step + 1));
    }
    total.Backward(scale);
  }
  AdamStep(model.parameters(), adam);
  return loss;
}

std::string MetricsRow::ToJson() const {
  nlohmann::json j;
  j["step"] = step;
  j["l_reconst"] = l_reconst;
  j["l_kl"] = l_kl;
  j["success"] = success;
  return j.dump();
}

MetricsRow MetricsRow::FromJson(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    MetricsRow r;
    r.step = j.at("step").get<int>();
    r.l_reconst = j.at("l_reconst").get<double>();
    r.l_kl = j.at("l_kl").get<double>();
    r.success = j.at("success").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed metrics record: ") + e.what());
  }
}

std::vector<MetricsRow> ReadMetrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(MetricsRow::FromJson(line));
  }
  return rows;
}

sim::EvaluationResult EvaluateModel(const GhcbcModel& model,
                                    const sim::WorldConfig& world,
                                    const TrainConfig& config,
                                    std::span<const uint64_t> seeds) {
  const EnsembleConfig ensemble = config.ensemble;
  return sim::Evaluate(
      world,
      [&] { return std::make_unique<PolicyAgent>(model, world, ensemble); },
      seeds, config.eval_workers);
}

TrainResult TrainLoop(GhcbcModel& model, std::span<const Episode> episodes,
                      const TrainConfig& config,
                      const sim::WorldConfig& world,
                      const std::filesystem::path& out_dir) {
  config.Validate();
  if (episodes.empty()) throw DatasetError("dataset is empty");
  std::ofstream metrics;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    metrics.open(out_dir / "metrics.jsonl", std::ios::trunc);
    if (!metrics) throw IoError("cannot write metrics in " + out_dir.string());
  }
  std::mt19937_64 rng(config.seed);
  AdamState adam;
  adam.lr = config.lr;
  const auto seeds = sim::SeedRange(config.eval_seed, config.eval_episodes);

  TrainResult result;
  double sum_reconst = 0.0;
  double sum_kl = 0.0;
  int window = 0;
  for (int step = 1; step <= config.steps; ++step) {
    const auto batch =
        SampleBatch(model, episodes, config.batch_size, world.arm, rng);
    const LossComponents loss = TrainStep(model, batch, adam, rng);
    sum_reconst += loss.reconst;
    sum_kl += loss.kl;
    ++window;
    if (step % config.eval_every != 0 && step != config.steps) continue;

    MetricsRow row;
    row.step = step;
    row.l_reconst = sum_reconst / window;
    row.l_kl = sum_kl / window;
    row.success = EvaluateModel(model, world, config, seeds).success_rate;
    sum_reconst = sum_kl = 0.0;
    window = 0;
    result.metrics.push_back(row);
    const bool best = row.success > result.best_success;
    if (best) {
      result.best_success = row.success;
      result.best_step = step;
    }
    if (!out_dir.empty()) {
      metrics << row.ToJson() << "\n" << std::flush;
      SaveCheckpoint(model.parameters(),
                     out_dir / ("step_" + std::to_string(step) + ".ckpt"));
      if (best) SaveCheckpoint(model.parameters(), out_dir / "best.ckpt");
    }
  }
  return result;
}

}  // namespace ghcbc
