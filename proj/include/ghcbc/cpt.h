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

#ifndef GHCBC_CPT_H_
#define GHCBC_CPT_H_

#include <span>
#include <string>

#include "ghcbc/gcbc.h"
#include "ghcbc/hcbc.h"
#include "ghcbc/nn.h"
#include "ghcbc/vision.h"

namespace ghcbc {

// Policy hyperparameters. Defaults are the desk profile; Paper() carries
// the published model table (8 heads, 4 encoder / 7 decoder layers, 4
// history-encoder layers, chunk and history length 20, gripper thresholds
// 0.6 / 0.4).
struct PolicyConfig {
  int d_model = 32;
  int n_heads = 8;
  int enc_layers = 4;
  int dec_layers = 7;
  int hcbc_layers = 4;
  int ff_dim = 64;
  int chunk_k = 20;
  int action_dim = 4;
  int history_k = 20;
  int latent_dim = 32;
  double gripper_close = 0.6;
  double gripper_open = 0.4;
  double kl_beta = 10.0;

  static PolicyConfig Paper();
  static PolicyConfig Desk();
  void Validate() const;
};

// Predicted (or target) action sequence, shape (chunk_k, action_dim).
struct ActionChunk {
  Tensor actions;
};

struct PolicyTrace {
  int encoder_sequence_length = 0;
  Shape memory;
  Shape output;
};

// Fuses vision tokens, pose tokens and the history token in a transformer
// encoder, then decodes chunk_k learned queries into actions.
//
// Every input stream carries a learned additive tag: one for vision, one
// per pose token, one for the history token. Token identity comes from
// tags, not sequence position.
class ConstrainedPoseTransformer {
 public:
  ConstrainedPoseTransformer(ParameterStore& store, const std::string& name,
                             const PolicyConfig& config, int pose_tokens);

  // `pose` is (pose_tokens, d) or undefined when pose_tokens == 0.
  // `tag_order[i]` names the tag added to pose row i (identity if empty).
  ActionChunk Forward(const VisionTokens& vision, const Tensor& pose,
                      const HcFeature& history,
                      std::span<const int> tag_order = {},
                      PolicyTrace* trace = nullptr) const;

  ActionChunk Forward(const VisionTokens& vision, const GcFeatures& gc,
                      const HcFeature& history) const {
    return Forward(vision, gc.f_pose, history);
  }

  int pose_tokens() const { return pose_tokens_; }

 private:
  PolicyConfig config_;
  int pose_tokens_;
  Tensor vision_tag_;
  Tensor pose_tags_;  // (pose_tokens, d)
  Tensor history_tag_;
  Tensor queries_;  // (chunk_k, d)
  nn::TransformerEncoder encoder_;
  nn::TransformerDecoder decoder_;
  nn::Linear head_;
};

// Mean squared error over every chunk entry, shape (1).
Tensor ReconstructionLoss(const ActionChunk& prediction,
                          const ActionChunk& target);

}  // namespace ghcbc

#endif  // GHCBC_CPT_H_
