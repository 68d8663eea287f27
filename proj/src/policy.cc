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

#include "ghcbc/policy.h"

#include "ghcbc/errors.h"
#include "ghcbc/sim.h"

namespace ghcbc {

ModelConfig ModelConfig::Paper() {
  ModelConfig c;
  c.vision = VisionConfig::Paper();
  c.policy = PolicyConfig::Paper();
  c.n_joints = 7;
  c.relative_actions = false;
  return c;
}

ModelConfig ModelConfig::Desk() { return ModelConfig(); }

int ModelConfig::pose_token_count() const {
  int n = ablation.gc_enabled ? 2 : 0;
  switch (ablation.input_pose_mode) {
    case PoseInputMode::kNone: break;
    case PoseInputMode::kJoint:
    case PoseInputMode::kEe: n += 1; break;
    case PoseInputMode::kJointEe: n += 2; break;
  }
  return n;
}

void ModelConfig::Validate() const {
  vision.Validate();
  policy.Validate();
  if (vision.d_model != policy.d_model) {
    throw ConfigError("vision d_model " + std::to_string(vision.d_model) +
                      " differs from policy d_model " +
                      std::to_string(policy.d_model));
  }
  if (n_joints < 1) throw ConfigError("n_joints must be positive");
  if (action_mean.size() != action_scale.size() ||
      (!action_mean.empty() &&
       static_cast<int>(action_mean.size()) != policy.action_dim)) {
    throw ConfigError("action_mean and action_scale must both be empty or "
                      "both have action_dim entries");
  }
  for (double s : action_scale) {
    if (!(s > 0.0)) throw ConfigError("action_scale entries must be positive");
  }
}

GhcbcModel::GhcbcModel(const ModelConfig& config, uint64_t init_seed)
    : config_(config), store_(std::make_unique<ParameterStore>(init_seed)) {
  config_.Validate();
  const PolicyConfig& p = config_.policy;
  const int d = p.d_model;
  vision_ = std::make_unique<VisionEncoder>(*store_, "vision", config_.vision);
  if (config_.ablation.gc_enabled) {
    gc_ = std::make_unique<GcEncoder>(*store_, "gc", config_.n_joints, d);
  }
  const PoseInputMode pose_mode = config_.ablation.input_pose_mode;
  if (pose_mode == PoseInputMode::kJoint ||
      pose_mode == PoseInputMode::kJointEe) {
    joint_token_.emplace(*store_, "pose.joint", config_.n_joints + 1, d);
  }
  if (pose_mode == PoseInputMode::kEe || pose_mode == PoseInputMode::kJointEe) {
    ee_token_.emplace(*store_, "pose.ee", 8, d);
  }
  switch (config_.ablation.hc_mode) {
    case HcMode::kActionOnly:
    case HcMode::kActionImage: {
      HistoryEncoderConfig h;
      h.d_model = d;
      h.history_k = p.history_k;
      h.action_dim = p.action_dim;
      h.layers = p.hcbc_layers;
      h.heads = p.n_heads;
      h.ff_hidden = p.ff_dim;
      h.latent_dim = p.latent_dim;
      h.use_vision = config_.ablation.hc_mode == HcMode::kActionImage;
      history_ = std::make_unique<HistoryEncoder>(*store_, "hcbc", h);
      break;
    }
    case HcMode::kStyleVariable: {
      StyleEncoderConfig s;
      s.d_model = d;
      s.chunk_k = p.chunk_k;
      s.action_dim = p.action_dim;
      s.pose_dim = config_.n_joints + 1;
      s.layers = p.hcbc_layers;
      s.heads = p.n_heads;
      s.ff_hidden = p.ff_dim;
      s.latent_dim = p.latent_dim;
      style_ = std::make_unique<StyleEncoder>(*store_, "style", s);
      break;
    }
    case HcMode::kNone:
      break;
  }
  cpt_ = std::make_unique<ConstrainedPoseTransformer>(
      *store_, "cpt", p, config_.pose_token_count());
}

Tensor GhcbcModel::NormalizeActions(const Tensor& raw) const {
  if (config_.action_mean.empty()) return raw;
  const int64_t width = static_cast<int64_t>(config_.action_mean.size());
  if (raw.dim(-1) != width) {
    throw DimensionError("actions " + ShapeToString(raw.shape()) +
                         " do not have width " + std::to_string(width));
  }
  std::vector<double> out(raw.data().begin(), raw.data().end());
  for (size_t i = 0; i < out.size(); ++i) {
    const size_t c = i % width;
    out[i] = (out[i] - config_.action_mean[c]) / config_.action_scale[c];
  }
  return Tensor::FromVector(raw.shape(), std::move(out));
}

std::vector<double> GhcbcModel::DenormalizeAction(
    std::span<const double> action) const {
  std::vector<double> out(action.begin(), action.end());
  if (config_.action_mean.empty()) return out;
  if (out.size() != config_.action_mean.size()) {
    throw DimensionError("action width " + std::to_string(out.size()) +
                         " differs from normalizer width " +
                         std::to_string(config_.action_mean.size()));
  }
  for (size_t c = 0; c < out.size(); ++c) {
    out[c] = out[c] * config_.action_scale[c] + config_.action_mean[c];
  }
  return out;
}

Tensor GhcbcModel::EncodeActions(const Tensor& raw, const JointPose& joint,
                                 const EePose& ee) const {
  if (!config_.relative_actions) return NormalizeActions(raw);
  const PoseOutput output = config_.ablation.pose_output;
  const std::vector<double> current = sim::PoseAction(joint, ee, output);
  const int64_t width = raw.dim(-1);
  std::vector<double> rel;
  rel.reserve(raw.numel());
  for (int64_t r = 0; r < raw.numel() / width; ++r) {
    const auto row = sim::RelativeAction(raw.data().subspan(r * width, width),
                                         current, output);
    rel.insert(rel.end(), row.begin(), row.end());
  }
  return NormalizeActions(Tensor::FromVector(raw.shape(), std::move(rel)));
}

std::vector<double> GhcbcModel::DecodeAction(std::span<const double> action,
                                             const JointPose& joint,
                                             const EePose& ee) const {
  std::vector<double> out = DenormalizeAction(action);
  if (!config_.relative_actions) return out;
  const PoseOutput output = config_.ablation.pose_output;
  return sim::AbsoluteAction(out, sim::PoseAction(joint, ee, output), output);
}

VisionTokens GhcbcModel::EncodeImage(const Tensor& image) const {
  return vision_->Encode(image);
}

PolicyOutput GhcbcModel::Forward(const PolicyInput& input, LatentMode mode,
                                 std::mt19937_64* rng) const {
  if ((input.image == nullptr) == (input.vision == nullptr)) {
    throw ContractError("policy input needs exactly one of image or vision");
  }
  PolicyOutput out;
  out.vision = input.vision ? *input.vision : vision_->Encode(*input.image);

  std::vector<Tensor> pose_rows;
  if (gc_) {
    if (input.tracker == nullptr) {
      throw StateError("GC features need a reference tracker");
    }
    pose_rows.push_back(
        gc_->Forward(input.joint, input.ee, *input.tracker).f_pose);
  }
  if (joint_token_) {
    const auto v = input.joint.Vector();
    pose_rows.push_back((*joint_token_)(Tensor::FromVector(
        {1, static_cast<int64_t>(v.size())}, std::vector<double>(v))));
  }
  if (ee_token_) {
    pose_rows.push_back((*ee_token_)(Tensor::FromVector({1, 8}, input.ee.Vector())));
  }
  Tensor pose = pose_rows.empty() ? Tensor() : Concat(pose_rows, 0);

  HcFeature hc;
  if (history_) {
    if (input.history == nullptr) {
      throw StateError("history encoder needs history buffers");
    }
    const HistoryBuffers* history = input.history;
    HistoryBuffers encoded(history->capacity());
    if (!config_.action_mean.empty() || config_.relative_actions) {
      for (int i = 0; i < history->size(); ++i) {
        const auto& a = history->actions()[i];
        const Tensor row = EncodeActions(
            Tensor::FromVector({1, static_cast<int64_t>(a.size())},
                               std::vector<double>(a)),
            input.joint, input.ee);
        encoded.Push(VisionTokens{history->vision()[i]},
                     std::vector<double>(row.data().begin(), row.data().end()));
      }
      history = &encoded;
    }
    auto [feature, latent] =
        history_->Encode(history_->AssembleTokens(*history), mode, rng);
    hc = feature;
    out.latent = latent;
  } else if (style_) {
    auto [feature, latent] =
        style_->Encode(input.joint.Vector(), input.target_chunk, mode, rng);
    hc = feature;
    if (mode == LatentMode::kTrain) out.latent = latent;
  } else {
    hc.xi = Tensor::Zeros({1, config_.policy.d_model});
  }

  out.chunk = cpt_->Forward(out.vision, pose, hc, {}, &out.trace);
  return out;
}

}  // namespace ghcbc
