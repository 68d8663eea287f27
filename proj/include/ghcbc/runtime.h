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

#ifndef GHCBC_RUNTIME_H_
#define GHCBC_RUNTIME_H_

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ghcbc/gcbc.h"
#include "ghcbc/hcbc.h"
#include "ghcbc/policy.h"
#include "ghcbc/sim.h"
#include "ghcbc/vision.h"

namespace ghcbc {

// Per-timestep lists of predicted actions, each list in arrival order.
// Writes landing at or beyond the horizon are discarded.
class ChunkBuffer {
 public:
  ChunkBuffer(int horizon, int chunk_k);

  // Row r of `chunk` goes to slot t + r.
  void Write(int t, const std::vector<std::vector<double>>& chunk);
  const std::vector<std::vector<double>>& Slot(int t) const;
  void Clear();

  int horizon() const { return horizon_; }
  int chunk_k() const { return chunk_k_; }
  // Predictions held in slots >= t.
  size_t PendingFrom(int t) const;

 private:
  int horizon_;
  int chunk_k_;
  std::vector<std::vector<std::vector<double>>> slots_;
};

struct EnsembleConfig {
  double m = 0.01;
  // Index 0 is the oldest prediction unless set.
  bool newest_first = false;
};

// sum_i w_i p_i / sum_i w_i with w_i = exp(-m i). Throws NoPredictionError
// on an empty list and ConfigError on negative m.
std::vector<double> Ensemble(std::span<const std::vector<double>> predictions,
                             const EnsembleConfig& config);

struct GripperState {
  int value = 0;  // 1 closed
  double raw = 0.0;
};

// raw >= close -> 1, raw <= open -> 0, otherwise the previous value.
GripperState GripperHysteresis(double raw, const GripperState& prev,
                               double close_threshold, double open_threshold);

struct RuntimeConfig {
  int horizon = 48;
  int chunk_k = 20;
  int history_k = 20;
  EnsembleConfig ensemble;
  double gripper_close = 0.6;
  double gripper_open = 0.4;
  bool clear_on_transition = true;
};

// Produces a (chunk_k x action_dim) prediction for one timestep. The last
// action channel is the gripper.
class ChunkPredictor {
 public:
  virtual ~ChunkPredictor() = default;
  virtual std::vector<std::vector<double>> Predict(
      const Tensor& image, const JointPose& joint, const EePose& ee,
      const ReferenceTracker& tracker, const HistoryBuffers& history,
      VisionTokens* vision) = 0;
};

// Eval-mode forward pass of a trained model; no gradient tape is built.
class ModelPredictor : public ChunkPredictor {
 public:
  explicit ModelPredictor(const GhcbcModel& model) : model_(model) {}
  std::vector<std::vector<double>> Predict(const Tensor& image,
                                           const JointPose& joint,
                                           const EePose& ee,
                                           const ReferenceTracker& tracker,
                                           const HistoryBuffers& history,
                                           VisionTokens* vision) override;

 private:
  const GhcbcModel& model_;
};

struct StepRecord {
  int t = 0;
  std::vector<double> raw_action;
  std::vector<double> executed_action;
  int gripper = 0;
  bool transition = false;
  // Predictions that formed the ensemble at slot t.
  size_t slot_predictions = 0;
  // After the step completes.
  size_t history_length = 0;
  size_t pending_predictions = 0;

  std::string ToJson() const;
  static StepRecord FromJson(const std::string& line);
};

// The closed-loop inference state machine: predict a chunk every step,
// buffer it, ensemble the current slot, threshold the gripper, and on a
// gripper transition clear the buffers and re-anchor the reference poses.
class PolicyRuntime {
 public:
  PolicyRuntime(ChunkPredictor& predictor, const RuntimeConfig& config);

  // Empty buffers, references at the first pose, gripper open.
  void Reset(const JointPose& joint, const EePose& ee);
  // Throws StateError before Reset and EpisodeEndError once t reaches the
  // horizon.
  StepRecord Step(const Tensor& image, const JointPose& joint,
                  const EePose& ee);

  bool initialized() const { return initialized_; }
  int time() const { return t_; }
  const ChunkBuffer& chunks() const { return chunks_; }
  const HistoryBuffers& history() const { return history_; }
  const ReferenceTracker& tracker() const { return tracker_; }
  const GripperState& gripper() const { return gripper_; }
  const RuntimeConfig& config() const { return config_; }

 private:
  ChunkPredictor& predictor_;
  RuntimeConfig config_;
  ChunkBuffer chunks_;
  HistoryBuffers history_;
  ReferenceTracker tracker_;
  GripperState gripper_;
  int t_ = 0;
  bool initialized_ = false;
};

RuntimeConfig RuntimeConfigFor(const ModelConfig& model,
                               const sim::WorldConfig& world,
                               const EnsembleConfig& ensemble);

// Runs a trained model in the desk world, converting policy actions to
// joint commands. Keeps a JSON-lines trace of the last episode.
class PolicyAgent : public sim::Agent {
 public:
  PolicyAgent(const GhcbcModel& model, const sim::WorldConfig& world,
              const EnsembleConfig& ensemble);

  void Reset(const sim::WorldState& state,
             const sim::Observation& obs) override;
  std::vector<double> Act(const sim::WorldState& state,
                          const sim::Observation& obs) override;
  std::string Trace() const override { return trace_; }

 private:
  const GhcbcModel& model_;
  sim::WorldConfig world_;
  ModelPredictor predictor_;
  PolicyRuntime runtime_;
  std::string trace_;
};

// Violations of the runtime trace invariants, one message each. An empty
// result means the trace is consistent.
std::vector<std::string> CheckTrace(std::span<const StepRecord> records,
                                    const RuntimeConfig& config);
std::vector<StepRecord> ParseTrace(const std::string& jsonl);

}  // namespace ghcbc

#endif  // GHCBC_RUNTIME_H_
