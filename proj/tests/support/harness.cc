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

#include "support/harness.h"

#include <algorithm>
#include <sstream>

#include "ghcbc/trainer.h"

namespace ghcbc::testing {
namespace {

JointPose RandomJoint(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {{u(rng), u(rng), u(rng)}, 0.0};
}

EePose RandomEe(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EePose ee;
  ee.position = {u(rng), u(rng), 0.0};
  return ee;
}

std::string At(const std::string& what, int t) {
  return what + " at t=" + std::to_string(t);
}

class ReplayPredictor : public ChunkPredictor {
 public:
  ReplayPredictor(const Episode& episode, const RuntimeConfig& cfg,
                  const sim::ArmConfig& arm, std::vector<std::string>& out)
      : episode_(episode), cfg_(cfg), arm_(arm), out_(out) {}

  std::vector<std::vector<double>> Predict(
      const Tensor& /*image*/, const JointPose& /*joint*/, const EePose& /*ee*/,
      const ReferenceTracker& tracker, const HistoryBuffers& history,
      VisionTokens* vision) override {
    const ReferenceReplay ref = ReplayReferences(
        episode_, t_, cfg_.gripper_close, cfg_.gripper_open);
    if (tracker.ref_joint().Vector() != ref.joint.Vector() ||
        tracker.ref_ee().Vector() != ref.ee.Vector() ||
        tracker.ref_gripper_state() != ref.gripper_state) {
      out_.push_back(At("reference mismatch", t_));
    }
    const int start =
        HistoryStart(episode_, t_, cfg_.history_k, cfg_.clear_on_transition,
                     cfg_.gripper_close, cfg_.gripper_open);
    if (history.size() != t_ - start) {
      out_.push_back(At("history length mismatch", t_));
    } else {
      for (int h = start; h < t_; ++h) {
        const auto& got = history.actions()[h - start];
        const auto& want = episode_.actions[h];
        for (size_t c = 0; c < want.size(); ++c) {
          if (std::abs(got[c] - want[c]) > 1e-12) {
            out_.push_back(At("history action mismatch", t_));
            break;
          }
        }
      }
    }
    const Tensor chunk =
        TargetChunk(episode_, t_, cfg_.chunk_k, arm_, PoseOutput::kJoint);
    const int64_t width = chunk.dim(1);
    std::vector<std::vector<double>> rows(cfg_.chunk_k);
    for (int r = 0; r < cfg_.chunk_k; ++r) {
      rows[r].assign(chunk.data().begin() + r * width,
                     chunk.data().begin() + (r + 1) * width);
    }
    if (vision != nullptr) vision->tokens = Tensor::Zeros({1, 1});
    ++t_;
    return rows;
  }

 private:
  const Episode& episode_;
  RuntimeConfig cfg_;
  sim::ArmConfig arm_;
  std::vector<std::string>& out_;
  int t_ = 0;
};

}  // namespace

RandomPredictor::RandomPredictor(int chunk_k, uint64_t seed)
    : chunk_k_(chunk_k), rng_(seed) {}

std::vector<std::vector<double>> RandomPredictor::Predict(
    const Tensor& /*image*/, const JointPose& /*joint*/, const EePose& /*ee*/,
    const ReferenceTracker& /*tracker*/, const HistoryBuffers& /*history*/,
    VisionTokens* vision) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), g(0.0, 1.0);
  if (g(rng_) < 0.15) bias_ = 1.0 - bias_;
  std::vector<std::vector<double>> chunk(chunk_k_);
  for (auto& row : chunk) {
    row = {u(rng_), u(rng_), u(rng_),
           std::clamp(bias_ + 0.3 * u(rng_), 0.0, 1.0)};
  }
  if (vision != nullptr) vision->tokens = Tensor::Zeros({1, 1});
  return chunk;
}

StateMachineReport RunRandomStateMachine(int min_steps, uint64_t seed) {
  StateMachineReport report;
  std::mt19937_64 rng(seed);
  const Tensor image = Tensor::Zeros({1, 2, 2});
  uint64_t episode = 0;
  while (report.steps < min_steps) {
    RuntimeConfig cfg;
    cfg.horizon = 20 + static_cast<int>(rng() % 60);
    cfg.chunk_k = 1 + static_cast<int>(rng() % 20);
    cfg.history_k = 1 + static_cast<int>(rng() % 20);
    cfg.ensemble.m = static_cast<double>(rng() % 3) * 0.05;
    cfg.ensemble.newest_first = rng() % 2 == 0;
    cfg.clear_on_transition = rng() % 4 != 0;
    RandomPredictor predictor(cfg.chunk_k, seed * 1000003 + episode++);
    PolicyRuntime runtime(predictor, cfg);
    runtime.Reset(RandomJoint(rng), RandomEe(rng));
    std::vector<StepRecord> records;
    for (int t = 0; t < cfg.horizon; ++t) {
      const JointPose joint = RandomJoint(rng);
      const EePose ee = RandomEe(rng);
      const StepRecord r = runtime.Step(image, joint, ee);
      if (r.transition) {
        ++report.transitions;
        for (double d : JointDelta(joint, runtime.tracker())) {
          if (d != 0.0) report.violations.push_back(At("joint delta", t));
        }
        for (double d : EeDelta(ee, runtime.tracker())) {
          if (d != 0.0) report.violations.push_back(At("ee delta", t));
        }
        if (runtime.tracker().ref_gripper_state() != r.gripper) {
          report.violations.push_back(At("reference gripper", t));
        }
        if (cfg.clear_on_transition &&
            (!runtime.history().empty() ||
             runtime.chunks().PendingFrom(runtime.time()) != 0)) {
          report.violations.push_back(At("buffers not cleared", t));
        }
      }
      if (runtime.history().size() > cfg.history_k) {
        report.violations.push_back(At("history overflow", t));
      }
      const StepRecord back = StepRecord::FromJson(r.ToJson());
      if (back.raw_action != r.raw_action ||
          back.executed_action != r.executed_action ||
          back.pending_predictions != r.pending_predictions) {
        report.violations.push_back(At("trace round trip", t));
      }
      records.push_back(r);
    }
    for (const auto& v : CheckTrace(records, cfg)) {
      report.violations.push_back(v);
    }
    report.steps += cfg.horizon;
  }
  return report;
}

std::vector<std::string> CompareReplayWithTracker(
    std::span<const Episode> episodes, const sim::ArmConfig& arm,
    bool clear_on_transition) {
  std::vector<std::string> mismatches;
  for (const Episode& e : episodes) {
    RuntimeConfig cfg;
    cfg.horizon = e.length();
    cfg.clear_on_transition = clear_on_transition;
    std::vector<std::string> found;
    ReplayPredictor predictor(e, cfg, arm, found);
    PolicyRuntime runtime(predictor, cfg);
    runtime.Reset(e.joints[0], e.ees[0]);
    for (int t = 0; t < e.length(); ++t) {
      const StepRecord r = runtime.Step(e.images[t], e.joints[t], e.ees[t]);
      if (r.gripper != static_cast<int>(e.actions[t].back())) {
        found.push_back(At("executed gripper", t));
      }
    }
    for (const auto& f : found) {
      mismatches.push_back("episode " + std::to_string(e.seed) + ": " + f);
    }
  }
  return mismatches;
}

std::vector<std::string> CompareRuntimeWithDirectLoop(
    const GhcbcModel& model, const sim::WorldConfig& world,
    std::span<const uint64_t> seeds) {
  const ModelConfig& mc = model.config();
  RuntimeConfig cfg = RuntimeConfigFor(mc, world, EnsembleConfig{0.0, false});
  cfg.clear_on_transition = false;
  const int width = sim::ActionDim(mc.ablation.pose_output);
  std::vector<std::string> mismatches;
  for (uint64_t seed : seeds) {
    ModelPredictor predictor(model);
    PolicyRuntime runtime(predictor, cfg);
    sim::WorldState a = sim::Reset(world, seed);
    const sim::Observation first = sim::Observe(world, a);
    runtime.Reset(first.joint, first.ee);

    sim::WorldState b = a;
    ReferenceTracker tracker;
    tracker.Initialize(first.joint, first.ee);
    HistoryBuffers history(mc.policy.history_k);
    GripperState gripper;

    for (int t = 0; t < world.horizon; ++t) {
      const sim::Observation oa = sim::Observe(world, a);
      const StepRecord r = runtime.Step(oa.image, oa.joint, oa.ee);

      const sim::Observation ob = sim::Observe(world, b);
      PolicyInput in;
      in.image = &ob.image;
      in.joint = ob.joint;
      in.ee = ob.ee;
      in.tracker = &tracker;
      in.history = &history;
      PolicyOutput out;
      {
        NoGradGuard no_grad;
        out = model.Forward(in, LatentMode::kEval, nullptr);
      }
      std::vector<double> action =
          model.DecodeAction(out.chunk.actions.data().subspan(0, width),
                             ob.joint, ob.ee);
      gripper = GripperHysteresis(action.back(), gripper, cfg.gripper_close,
                                  cfg.gripper_open);
      action.back() = gripper.value;
      history.Push(std::move(out.vision), action);
      tracker.MaybeUpdate(ob.joint, ob.ee, gripper.value);

      if (r.executed_action != action) {
        std::ostringstream msg;
        msg << "seed " << seed << " t=" << t << ": executed actions differ";
        mismatches.push_back(msg.str());
        break;
      }
      const auto a_cmd = sim::JointCommandFromAction(
          world.arm, r.executed_action, mc.ablation.pose_output);
      const auto b_cmd = sim::JointCommandFromAction(world.arm, action,
                                                     mc.ablation.pose_output);
      a = sim::StepWorld(world, a, a_cmd);
      b = sim::StepWorld(world, b, b_cmd);
    }
  }
  return mismatches;
}

}  // namespace ghcbc::testing
