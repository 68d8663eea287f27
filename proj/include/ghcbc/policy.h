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

#ifndef GHCBC_POLICY_H_
#define GHCBC_POLICY_H_

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ghcbc/ablation.h"
#include "ghcbc/cpt.h"
#include "ghcbc/gcbc.h"
#include "ghcbc/hcbc.h"
#include "ghcbc/vision.h"

namespace ghcbc {

struct ModelConfig {
  VisionConfig vision;
  PolicyConfig policy;
  AblationConfig ablation;
  int n_joints = 3;
  // Per-channel action standardization (a - mean) / scale. Empty means
  // identity. The policy regresses and consumes standardized actions.
  std::vector<double> action_mean;
  std::vector<double> action_scale;
  // Actions enter and leave the policy relative to the observed pose at
  // that step (see sim::RelativeAction); standardization applies after.
  bool relative_actions = true;

  static ModelConfig Paper();
  static ModelConfig Desk();

  // Pose tokens entering the policy encoder: 2 GC tokens when enabled plus
  // the raw pose tokens selected by input_pose_mode.
  int pose_token_count() const;
  void Validate() const;
};

// Everything the shared forward path consumes for one timestep.
struct PolicyInput {
  // Exactly one of `image` / `vision` must be set; `vision` skips the
  // backbone when the caller already holds this frame's tokens.
  const Tensor* image = nullptr;
  const VisionTokens* vision = nullptr;
  JointPose joint;
  EePose ee;
  const ReferenceTracker* tracker = nullptr;
  const HistoryBuffers* history = nullptr;
  // Target chunk in policy units (see GhcbcModel::EncodeActions); read only
  // by the style-variable trainer in train mode. History actions are raw and
  // encoded internally.
  const Tensor* target_chunk = nullptr;
};

struct PolicyOutput {
  // Policy units; see GhcbcModel::DecodeAction.
  ActionChunk chunk;
  VisionTokens vision;
  // Set when the history slot comes from a latent encoder.
  std::optional<HcLatent> latent;
  PolicyTrace trace;
};

// Vision encoder + GC encoder + history encoder + constrained pose
// transformer, wired per the ablation switches. Shared by training and the
// inference runtime.
class GhcbcModel {
 public:
  GhcbcModel(const ModelConfig& config, uint64_t init_seed);

  PolicyOutput Forward(const PolicyInput& input, LatentMode mode,
                       std::mt19937_64* rng) const;
  VisionTokens EncodeImage(const Tensor& image) const;

  // Raw action rows (n, action_dim) to standardized units and back.
  Tensor NormalizeActions(const Tensor& raw) const;
  std::vector<double> DenormalizeAction(std::span<const double> action) const;
  // Raw action rows observed at pose (joint, ee) to policy units and back:
  // the relative frame when enabled, then standardization.
  Tensor EncodeActions(const Tensor& raw, const JointPose& joint,
                       const EePose& ee) const;
  std::vector<double> DecodeAction(std::span<const double> action,
                                   const JointPose& joint,
                                   const EePose& ee) const;

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return *store_; }
  const ParameterStore& parameters() const { return *store_; }

 private:
  ModelConfig config_;
  std::unique_ptr<ParameterStore> store_;
  std::unique_ptr<VisionEncoder> vision_;
  std::unique_ptr<GcEncoder> gc_;
  std::optional<nn::Linear> joint_token_;
  std::optional<nn::Linear> ee_token_;
  std::unique_ptr<HistoryEncoder> history_;
  std::unique_ptr<StyleEncoder> style_;
  std::unique_ptr<ConstrainedPoseTransformer> cpt_;
};

}  // namespace ghcbc

#endif  // GHCBC_POLICY_H_
