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

#include "ghcbc/cpt.h"

#include "ghcbc/errors.h"

namespace ghcbc {

PolicyConfig PolicyConfig::Paper() {
  PolicyConfig c;
  c.d_model = 512;
  c.ff_dim = 512;
  c.action_dim = 8;
  return c;
}

PolicyConfig PolicyConfig::Desk() { return PolicyConfig(); }

void PolicyConfig::Validate() const {
  if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) +
                      " must be divisible by n_heads " +
                      std::to_string(n_heads));
  }
  if (chunk_k < 1) throw ConfigError("chunk_k must be at least 1");
  if (history_k < 1) throw ConfigError("history_k must be at least 1");
  if (action_dim < 1) throw ConfigError("action_dim must be at least 1");
  if (enc_layers < 0 || dec_layers < 1 || hcbc_layers < 0 || ff_dim < 1 ||
      latent_dim < 1) {
    throw ConfigError("layer counts and widths must be positive");
  }
  if (!(0.0 <= gripper_open && gripper_open < gripper_close &&
        gripper_close <= 1.0)) {
    throw ConfigError("gripper thresholds need 0 <= open < close <= 1");
  }
  if (kl_beta < 0.0) throw ConfigError("kl_beta must be non-negative");
}

ConstrainedPoseTransformer::ConstrainedPoseTransformer(
    ParameterStore& store, const std::string& name, const PolicyConfig& config,
    int pose_tokens)
    : config_(config), pose_tokens_(pose_tokens) {
  config_.Validate();
  const int d = config_.d_model;
  vision_tag_ = store.Normal(name + ".vision_tag", {d}, 1.0);
  if (pose_tokens_ > 0) {
    pose_tags_ = store.Normal(name + ".pose_tags", {pose_tokens_, d}, 1.0);
  }
  history_tag_ = store.Normal(name + ".history_tag", {1, d}, 1.0);
  queries_ = store.Normal(name + ".queries", {config_.chunk_k, d}, 1.0);
  encoder_ = nn::TransformerEncoder(store, name + ".encoder",
                                    config_.enc_layers, d, config_.n_heads,
                                    config_.ff_dim);
  decoder_ = nn::TransformerDecoder(store, name + ".decoder",
                                    config_.dec_layers, d, config_.n_heads,
                                    config_.ff_dim);
  head_ = nn::Linear(store, name + ".head", d, config_.action_dim);
}

ActionChunk ConstrainedPoseTransformer::Forward(
    const VisionTokens& vision, const Tensor& pose, const HcFeature& history,
    std::span<const int> tag_order, PolicyTrace* trace) const {
  const int64_t d = config_.d_model;
  auto check_width = [d](const Tensor& t, const char* what) {
    if (t.rank() != 2 || t.dim(1) != d) {
      throw DimensionError(std::string(what) + " tokens " +
                           ShapeToString(t.shape()) + " do not have width " +
                           std::to_string(d));
    }
  };
  check_width(vision.tokens, "vision");
  check_width(history.xi, "history");
  if (history.xi.dim(0) != 1) {
    throw DimensionError("history feature must be a single token");
  }

  std::vector<Tensor> parts = {Add(vision.tokens, vision_tag_)};
  if (pose_tokens_ > 0) {
    check_width(pose, "pose");
    if (pose.dim(0) != pose_tokens_) {
      throw DimensionError("expected " + std::to_string(pose_tokens_) +
                           " pose tokens, got " + std::to_string(pose.dim(0)));
    }
    Tensor tags = pose_tags_;
    if (!tag_order.empty()) {
      if (static_cast<int>(tag_order.size()) != pose_tokens_) {
        throw ContractError("tag order length must equal pose token count");
      }
      std::vector<Tensor> rows;
      for (int idx : tag_order) rows.push_back(Slice(pose_tags_, 0, idx, 1));
      tags = Concat(rows, 0);
    }
    parts.push_back(Add(pose, tags));
  } else if (pose.defined()) {
    throw DimensionError("policy configured without pose tokens");
  }
  parts.push_back(Add(history.xi, history_tag_));

  Tensor sequence = Concat(parts, 0);
  Tensor memory = encoder_(sequence);
  Tensor decoded = decoder_(queries_, memory);
  Tensor actions = head_(decoded);
  if (trace) {
    trace->encoder_sequence_length = static_cast<int>(sequence.dim(0));
    trace->memory = memory.shape();
    trace->output = actions.shape();
  }
  return {actions};
}

Tensor ReconstructionLoss(const ActionChunk& prediction,
                          const ActionChunk& target) {
  if (prediction.actions.shape() != target.actions.shape()) {
    throw DimensionError("reconstruction loss shape mismatch: " +
                         ShapeToString(prediction.actions.shape()) + " vs " +
                         ShapeToString(target.actions.shape()));
  }
  Tensor diff = Sub(prediction.actions, target.actions);
  return Mean(Mul(diff, diff));
}

}  // namespace ghcbc
