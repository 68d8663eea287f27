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

#include "ghcbc/vision.h"

#include "ghcbc/errors.h"

namespace ghcbc {

VisionConfig VisionConfig::Paper() {
  VisionConfig c;
  c.image_channels = 3;
  c.image_h = 120;
  c.image_w = 160;
  c.backbone_channels = {16, 32, 64, 128, 1280};
  c.feat_h = 4;
  c.feat_w = 5;
  c.d_model = 512;
  c.coord_channels = false;
  return c;
}

VisionConfig VisionConfig::Desk() { return VisionConfig(); }

void VisionConfig::Validate() const {
  if (backbone_channels.empty()) {
    throw ConfigError("vision backbone needs at least one layer");
  }
  int h = image_h, w = image_w;
  for (size_t i = 0; i < backbone_channels.size(); ++i) {
    h = ConvOutputExtent(h, 3, 2, 1);
    w = ConvOutputExtent(w, 3, 2, 1);
  }
  if (h != feat_h || w != feat_w) {
    throw ConfigError("backbone maps " + std::to_string(image_h) + "x" +
                      std::to_string(image_w) + " to " + std::to_string(h) +
                      "x" + std::to_string(w) + ", config expects " +
                      std::to_string(feat_h) + "x" + std::to_string(feat_w));
  }
  if (d_model <= 0 || d_model % 4 != 0) {
    throw ConfigError("d_model must be a positive multiple of 4, got " +
                      std::to_string(d_model));
  }
}

Tensor PositionalEncoding2d(int h, int w, int d_model) {
  if (d_model <= 0 || d_model % 4 != 0) {
    throw ConfigError("2-D positional encoding needs d_model divisible by 4, "
                      "got " + std::to_string(d_model));
  }
  const int half = d_model / 2;
  Tensor rows = nn::SinusoidalTable(h, half);
  Tensor cols = nn::SinusoidalTable(w, half);
  std::vector<double> out(static_cast<size_t>(h) * w * d_model);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double* dst = &out[(static_cast<size_t>(y) * w + x) * d_model];
      for (int i = 0; i < half; ++i) {
        dst[i] = rows.data()[y * half + i];
        dst[half + i] = cols.data()[x * half + i];
      }
    }
  }
  return Tensor::FromVector({static_cast<int64_t>(h) * w, d_model},
                            std::move(out));
}

VisionEncoder::VisionEncoder(ParameterStore& store, const std::string& name,
                             const VisionConfig& config)
    : config_(config) {
  config_.Validate();
  int in = config_.image_channels + (config_.coord_channels ? 2 : 0);
  for (size_t i = 0; i < config_.backbone_channels.size(); ++i) {
    const int out = config_.backbone_channels[i];
    backbone_.emplace_back(store, name + ".conv" + std::to_string(i), in, out,
                           /*kernel=*/3, /*stride=*/2, /*padding=*/1);
    in = out;
  }
  projection_ = nn::Linear(store, name + ".projection", config_.feat_c(),
                           config_.d_model);
  Tensor pe = PositionalEncoding2d(config_.feat_h, config_.feat_w,
                                   config_.d_model);
  NoGradGuard no_grad;
  position_ = Reshape(Transpose(pe),
                      {config_.d_model, config_.feat_h, config_.feat_w});
  if (config_.coord_channels) {
    const int h = config_.image_h, w = config_.image_w;
    std::vector<double> planes(2 * static_cast<size_t>(h) * w);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        planes[static_cast<size_t>(r) * w + c] = 2.0 * (r + 0.5) / h - 1.0;
        planes[static_cast<size_t>(h + r) * w + c] = 2.0 * (c + 0.5) / w - 1.0;
      }
    }
    coords_ = Tensor::FromVector({2, h, w}, std::move(planes));
  }
}

VisionTokens VisionEncoder::Encode(const Tensor& image,
                                   VisionShapeTrace* trace) const {
  const Shape expected = {config_.image_channels, config_.image_h,
                          config_.image_w};
  if (image.shape() != expected) {
    throw DimensionError("image shape " + ShapeToString(image.shape()) +
                         " does not match configured " +
                         ShapeToString(expected));
  }
  Tensor x = config_.coord_channels ? Concat({image, coords_}, 0) : image;
  for (const auto& conv : backbone_) x = Relu(conv(x));
  const int64_t c = config_.feat_c(), d = config_.d_model;
  const int64_t n = config_.token_count();
  Tensor pixels = Transpose(Reshape(x, {c, n}));  // (n, feat_c)
  Tensor projected =
      Reshape(Transpose(projection_(pixels)), {d, config_.feat_h, config_.feat_w});
  Tensor encoded = Add(projected, position_);
  Tensor flattened = Reshape(encoded, {d, n});
  Tensor tokens = Transpose(flattened);
  if (trace) {
    trace->feature_map = x.shape();
    trace->projected = projected.shape();
    trace->flattened = flattened.shape();
    trace->tokens = tokens.shape();
  }
  return {tokens};
}

}  // namespace ghcbc
