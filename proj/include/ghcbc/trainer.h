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

#ifndef GHCBC_TRAINER_H_
#define GHCBC_TRAINER_H_

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ghcbc/dataset.h"
#include "ghcbc/parameters.h"
#include "ghcbc/policy.h"
#include "ghcbc/runtime.h"
#include "ghcbc/sim.h"

namespace ghcbc {

struct TrainConfig {
  int batch_size = 8;
  int steps = 10000;
  int eval_every = 1000;
  int eval_episodes = 50;
  // Evaluation seeds are eval_seed, eval_seed+1, ...; kept disjoint from
  // demonstration seeds.
  uint64_t eval_seed = 1000000;
  int eval_workers = 1;
  double lr = 1e-3;
  uint64_t seed = 0;
  EnsembleConfig ensemble;

  void Validate() const;
};

// Reference poses in effect at step t, replayed from the gripper channel of
// the actions before t with the runtime's hysteresis rule.
struct ReferenceReplay {
  JointPose joint;
  EePose ee;
  int gripper_state = 0;
  // Step of the most recent transition before t, or -1.
  int last_transition = -1;
};

ReferenceReplay ReplayReferences(const Episode& episode, int t,
                                 double close_threshold,
                                 double open_threshold);

// First step of the history window ending at t - 1. The window starts after
// the last transition when clearing is on, mirroring the runtime.
int HistoryStart(const Episode& episode, int t, int history_k,
                 bool clear_on_transition, double close_threshold,
                 double open_threshold);

// Actions t .. t+k-1 in the policy's action space; rows past the episode
// end repeat the final action. Shape (k, action_dim).
Tensor TargetChunk(const Episode& episode, int t, int chunk_k,
                   const sim::ArmConfig& arm, PoseOutput output);

// Fills config.action_mean / action_scale from the demonstrations in the
// policy action space. The gripper channel keeps mean 0 and scale 1; other
// scales are floored at 0.05.
void SetActionStats(ModelConfig& config, std::span<const Episode> episodes,
                    const sim::ArmConfig& arm);

struct TrainSample {
  int episode = 0;
  int t = 0;
  Tensor image;
  JointPose joint;
  EePose ee;
  ReferenceTracker tracker;
  HistoryBuffers history{1};
  // Standardized with the model's action statistics.
  Tensor target;
};

// Assembles the sample at (episode, t). History vision tokens are encoded
// with the model's current weights and carry no gradient.
TrainSample BuildSample(const GhcbcModel& model,
                        std::span<const Episode> episodes, int episode, int t,
                        const sim::ArmConfig& arm);

// Uniform (episode, t) draws.
std::vector<TrainSample> SampleBatch(const GhcbcModel& model,
                                     std::span<const Episode> episodes,
                                     int batch_size,
                                     const sim::ArmConfig& arm,
                                     std::mt19937_64& rng);

struct LossComponents {
  double reconst = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

// reconst + beta * kl averaged over the batch, then one Adam update. Throws
// DivergenceError naming the step on a non-finite loss.
LossComponents TrainStep(GhcbcModel& model, std::span<const TrainSample> batch,
                         AdamState& adam, std::mt19937_64& rng);

struct MetricsRow {
  int step = 0;
  double l_reconst = 0.0;
  double l_kl = 0.0;
  double success = 0.0;

  std::string ToJson() const;
  static MetricsRow FromJson(const std::string& line);
};

std::vector<MetricsRow> ReadMetrics(const std::filesystem::path& path);

struct TrainResult {
  std::vector<MetricsRow> metrics;
  int best_step = -1;
  double best_success = -1.0;
};

sim::EvaluationResult EvaluateModel(const GhcbcModel& model,
                                    const sim::WorldConfig& world,
                                    const TrainConfig& config,
                                    std::span<const uint64_t> seeds);

// Trains for config.steps, evaluating every eval_every steps and after the
// last step. With a non-empty out_dir writes metrics.jsonl, a checkpoint per
// evaluation and best.ckpt (highest success, earliest on ties).
TrainResult TrainLoop(GhcbcModel& model, std::span<const Episode> episodes,
                      const TrainConfig& config,
                      const sim::WorldConfig& world,
                      const std::filesystem::path& out_dir);

}  // namespace ghcbc

#endif  // GHCBC_TRAINER_H_
