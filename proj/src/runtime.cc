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

#include "ghcbc/runtime.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ghcbc/errors.h"

namespace ghcbc {

ChunkBuffer::ChunkBuffer(int horizon, int chunk_k)
    : horizon_(horizon), chunk_k_(chunk_k), slots_(std::max(horizon, 0)) {
  if (horizon < 1 || chunk_k < 1) {
    throw ConfigError("chunk buffer needs positive horizon and chunk size");
  }
}

void ChunkBuffer::Write(int t, const std::vector<std::vector<double>>& chunk) {
  if (static_cast<int>(chunk.size()) != chunk_k_) {
    throw DimensionError("chunk has " + std::to_string(chunk.size()) +
                         " rows, expected " + std::to_string(chunk_k_));
  }
  for (int r = 0; r < chunk_k_; ++r) {
    const int slot = t + r;
    if (slot < 0 || slot >= horizon_) continue;
    slots_[slot].push_back(chunk[r]);
  }
}

const std::vector<std::vector<double>>& ChunkBuffer::Slot(int t) const {
  if (t < 0 || t >= horizon_) {
    throw DimensionError("slot " + std::to_string(t) + " outside horizon " +
                         std::to_string(horizon_));
  }
  return slots_[t];
}

void ChunkBuffer::Clear() {
  for (auto& s : slots_) s.clear();
}

size_t ChunkBuffer::PendingFrom(int t) const {
  size_t n = 0;
  for (int s = std::max(t, 0); s < horizon_; ++s) n += slots_[s].size();
  return n;
}

std::vector<double> Ensemble(std::span<const std::vector<double>> predictions,
                             const EnsembleConfig& config) {
  if (predictions.empty()) {
    throw NoPredictionError("no predictions to ensemble");
  }
  if (!(config.m >= 0.0)) {
    throw ConfigError("ensemble decay m must be non-negative");
  }
  const size_t n = predictions.size();
  const size_t width = predictions.front().size();
  std::vector<double> sum(width, 0.0);
  double total = 0.0;
  for (size_t j = 0; j < n; ++j) {
    const auto& p = predictions[j];
    if (p.size() != width) {
      throw DimensionError("ensemble predictions have unequal widths");
    }
    const size_t i = config.newest_first ? n - 1 - j : j;
    const double w = std::exp(-config.m * static_cast<double>(i));
    for (size_t c = 0; c < width; ++c) sum[c] += w * p[c];
    total += w;
  }
  for (double& v : sum) v /= total;
  return sum;
}

GripperState GripperHysteresis(double raw, const GripperState& prev,
                               double close_threshold, double open_threshold) {
  GripperState next;
  next.raw = raw;
  if (raw >= close_threshold) {
    next.value = 1;
  } else if (raw <= open_threshold) {
    next.value = 0;
  } else {
    next.value = prev.value;
  }
  return next;
}

std::vector<std::vector<double>> ModelPredictor::Predict(
    const Tensor& image, const JointPose& joint, const EePose& ee,
    const ReferenceTracker& tracker, const HistoryBuffers& history,
    VisionTokens* vision) {
  NoGradGuard no_grad;
  PolicyInput input;
  input.image = &image;
  input.joint = joint;
  input.ee = ee;
  input.tracker = &tracker;
  input.history = &history;
  PolicyOutput out = model_.Forward(input, LatentMode::kEval, nullptr);
  const Tensor& a = out.chunk.actions;
  const int64_t rows = a.dim(0);
  const int64_t cols = a.dim(1);
  std::vector<std::vector<double>> chunk(rows);
  for (int64_t r = 0; r < rows; ++r) {
    chunk[r] = model_.DecodeAction(a.data().subspan(r * cols, cols), joint, ee);
  }
  if (vision != nullptr) *vision = std::move(out.vision);
  return chunk;
}

std::string StepRecord::ToJson() const {
  nlohmann::json j;
  j["t"] = t;
  j["raw_action"] = raw_action;
  j["executed_action"] = executed_action;
  j["gripper"] = gripper;
  j["transition"] = transition;
  j["slot_predictions"] = slot_predictions;
  j["history_length"] = history_length;
  j["pending_predictions"] = pending_predictions;
  return j.dump();
}

StepRecord StepRecord::FromJson(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    StepRecord r;
    r.t = j.at("t").get<int>();
    r.raw_action = j.at("raw_action").get<std::vector<double>>();
    r.executed_action = j.at("executed_action").get<std::vector<double>>();
    r.gripper = j.at("gripper").get<int>();
    r.transition = j.at("transition").get<bool>();
    r.slot_predictions = j.at("slot_predictions").get<size_t>();
    r.history_length = j.at("history_length").get<size_t>();
    r.pending_predictions = j.at("pending_predictions").get<size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed trace record: ") + e.what());
  }
}

PolicyRuntime::PolicyRuntime(ChunkPredictor& predictor,
                             const RuntimeConfig& config)
    : predictor_(predictor),
      config_(config),
      chunks_(config.horizon, config.chunk_k),
      history_(config.history_k) {
  if (!(config.gripper_open < config.gripper_close)) {
    throw ConfigError("gripper open threshold must be below close threshold");
  }
  if (!(config.ensemble.m >= 0.0)) {
    throw ConfigError("ensemble decay m must be non-negative");
  }
}

void PolicyRuntime::Reset(const JointPose& joint, const EePose& ee) {
  chunks_.Clear();
  history_.Clear();
  tracker_.Initialize(joint, ee);
  gripper_ = GripperState{};
  t_ = 0;
  initialized_ = true;
}

StepRecord PolicyRuntime::Step(const Tensor& image, const JointPose& joint,
                               const EePose& ee) {
  if (!initialized_) throw StateError("runtime stepped before Reset");
  if (t_ >= config_.horizon) {
    throw EpisodeEndError("timestep " + std::to_string(t_) +
                          " reached horizon " +
                          std::to_string(config_.horizon));
  }
  VisionTokens vision;
  const auto chunk =
      predictor_.Predict(image, joint, ee, tracker_, history_, &vision);
  chunks_.Write(t_, chunk);

  StepRecord record;
  record.t = t_;
  const auto& slot = chunks_.Slot(t_);
  record.slot_predictions = slot.size();
  record.raw_action = Ensemble(slot, config_.ensemble);
  if (record.raw_action.empty()) {
    throw DimensionError("predicted actions have no gripper channel");
  }

  const GripperState prev = gripper_;
  gripper_ = GripperHysteresis(record.raw_action.back(), prev,
                               config_.gripper_close, config_.gripper_open);
  record.gripper = gripper_.value;
  record.executed_action = record.raw_action;
  record.executed_action.back() = static_cast<double>(gripper_.value);
  history_.Push(std::move(vision), record.executed_action);

  record.transition = tracker_.MaybeUpdate(joint, ee, gripper_.value);
  if (record.transition && config_.clear_on_transition) {
    chunks_.Clear();
    history_.Clear();
  }
  ++t_;
  record.history_length = static_cast<size_t>(history_.size());
  record.pending_predictions = chunks_.PendingFrom(t_);
  return record;
}

RuntimeConfig RuntimeConfigFor(const ModelConfig& model,
                               const sim::WorldConfig& world,
                               const EnsembleConfig& ensemble) {
  RuntimeConfig r;
  r.horizon = world.horizon;
  r.chunk_k = model.policy.chunk_k;
  r.history_k = model.policy.history_k;
  r.ensemble = ensemble;
  r.gripper_close = model.policy.gripper_close;
  r.gripper_open = model.policy.gripper_open;
  r.clear_on_transition = model.ablation.clear_on_transition;
  return r;
}

PolicyAgent::PolicyAgent(const GhcbcModel& model,
                         const sim::WorldConfig& world,
                         const EnsembleConfig& ensemble)
    : model_(model),
      world_(world),
      predictor_(model),
      runtime_(predictor_, RuntimeConfigFor(model.config(), world, ensemble)) {}

void PolicyAgent::Reset(const sim::WorldState& /*state*/,
                        const sim::Observation& obs) {
  runtime_.Reset(obs.joint, obs.ee);
  trace_.clear();
}

std::vector<double> PolicyAgent::Act(const sim::WorldState& /*state*/,
                                     const sim::Observation& obs) {
  const StepRecord record = runtime_.Step(obs.image, obs.joint, obs.ee);
  trace_ += record.ToJson();
  trace_ += '\n';
  return sim::JointCommandFromAction(world_.arm, record.executed_action,
                                     model_.config().ablation.pose_output);
}

std::vector<std::string> CheckTrace(std::span<const StepRecord> records,
                                    const RuntimeConfig& config) {
  std::vector<std::string> violations;
  auto fail = [&](int t, const std::string& what) {
    violations.push_back("t=" + std::to_string(t) + ": " + what);
  };
  GripperState gripper;
  size_t history = 0;
  size_t max_slot = 0;
  for (size_t n = 0; n < records.size(); ++n) {
    const StepRecord& r = records[n];
    if (r.t != static_cast<int>(n)) fail(r.t, "timestep out of sequence");
    if (r.t >= config.horizon) fail(r.t, "step beyond horizon");
    max_slot = std::min<size_t>(max_slot + 1, config.chunk_k);
    if (r.slot_predictions < 1) fail(r.t, "ensemble of an empty slot");
    if (r.slot_predictions > max_slot) {
      fail(r.t, "slot holds predictions from before the last clear");
    }
    if (r.raw_action.empty() ||
        r.raw_action.size() != r.executed_action.size()) {
      fail(r.t, "raw and executed actions differ in width");
      continue;
    }
    for (size_t c = 0; c + 1 < r.raw_action.size(); ++c) {
      if (r.raw_action[c] != r.executed_action[c]) {
        fail(r.t, "executed arm action differs from the ensemble");
      }
    }
    const GripperState next = GripperHysteresis(
        r.raw_action.back(), gripper, config.gripper_close, config.gripper_open);
    if (r.gripper != next.value) fail(r.t, "gripper state breaks hysteresis");
    if (r.executed_action.back() != static_cast<double>(r.gripper)) {
      fail(r.t, "executed gripper is not the binary state");
    }
    const bool transition = next.value != gripper.value;
    if (r.transition != transition) fail(r.t, "transition flag mismatch");
    history = std::min<size_t>(history + 1, config.history_k);
    if (transition && config.clear_on_transition) {
      history = 0;
      max_slot = 0;
      if (r.pending_predictions != 0) {
        fail(r.t, "chunk buffer not cleared on transition");
      }
    }
    if (r.history_length != history) {
      fail(r.t, "history length " + std::to_string(r.history_length) +
                    ", expected " + std::to_string(history));
    }
    gripper = next;
  }
  return violations;
}

std::vector<StepRecord> ParseTrace(const std::string& jsonl) {
  std::vector<StepRecord> records;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(StepRecord::FromJson(line));
  }
  return records;
}

}  // namespace ghcbc
