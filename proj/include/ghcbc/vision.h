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

#ifndef GHCBC_VISION_H_
#define GHCBC_VISION_H_

#include <string>
#include <vector>

#include "ghcbc/nn.h"

namespace ghcbc {

// Wrist-camera encoder geometry. The backbone is a stack of stride-2 3x3
// convolutions with ReLU; its last channel count is the feature width.
struct VisionConfig {
  int image_channels = 3;
  int image_h = 24;
  int image_w = 32;
  std::vector<int> backbone_channels = {8, 16, 16};
  // Appends normalized row/column coordinate planes to the backbone input.
  bool coord_channels = true;
  int feat_h = 3;
  int feat_w = 4;
  int d_model = 32;

  // 3x120x160 RGB, backbone ending in a (1280,4,5) map, 512-wide tokens.
  static VisionConfig Paper();
  // 3x24x32 RGB, (16,3,4) feature map, 32-wide tokens.
  static VisionConfig Desk();

  int feat_c() const { return backbone_channels.back(); }
  int token_count() const { return feat_h * feat_w; }
  // Checks the conv arithmetic lands on (feat_h, feat_w) and d_model % 4.
  void Validate() const;
};

// Per-frame vision tokens, shape (token_count, d_model).
struct VisionTokens {
  Tensor tokens;
};

// Intermediate shapes of one EncodeImage call.
struct VisionShapeTrace {
  Shape feature_map;  // (feat_c, feat_h, feat_w)
  Shape projected;    // (d_model, feat_h, feat_w)
  Shape flattened;    // (d_model, token_count)
  Shape tokens;       // (token_count, d_model)
};

// Fixed 2-D sinusoidal encoding, shape (h*w, d_model), row-major positions.
// The first d_model/2 channels encode the row, the rest the column.
Tensor PositionalEncoding2d(int h, int w, int d_model);

class VisionEncoder {
 public:
  VisionEncoder(ParameterStore& store, const std::string& name,
                const VisionConfig& config);

  // image (C,H,W) with values in [0,1].
  VisionTokens Encode(const Tensor& image,
                      VisionShapeTrace* trace = nullptr) const;

  const VisionConfig& config() const { return config_; }

 private:
  VisionConfig config_;
  std::vector<nn::Conv2d> backbone_;
  nn::Linear projection_;
  Tensor position_;  // (d_model, feat_h, feat_w)
  Tensor coords_;    // (2, image_h, image_w) when coord_channels
};

}  // namespace ghcbc

#endif  // GHCBC_VISION_H_
