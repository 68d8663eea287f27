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

#include "ghcbc/nn.h"

#include <cmath>

#include "ghcbc/errors.h"

namespace ghcbc::nn {

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out,
               bool bias)
    : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = store.Uniform(name + ".weight", {in, out}, bound);
  if (bias) bias_ = store.Constant(name + ".bias", {out}, 0.0);
}

Tensor Linear::operator()(const Tensor& x) const {
  return ghcbc::Linear(x, weight_, bias_);
}

LayerNormAffine::LayerNormAffine(ParameterStore& store, const std::string& name,
                                 int width) {
  gamma_ = store.Constant(name + ".gamma", {width}, 1.0);
  beta_ = store.Constant(name + ".beta", {width}, 0.0);
}

Tensor LayerNormAffine::operator()(const Tensor& x) const {
  return Add(Mul(LayerNorm(x), gamma_), beta_);
}

MultiHeadAttention::MultiHeadAttention(ParameterStore& store,
                                       const std::string& name, int d_model,
                                       int heads)
    : heads_(heads),
      q_(store, name + ".q", d_model, d_model),
      k_(store, name + ".k", d_model, d_model),
      v_(store, name + ".v", d_model, d_model),
      o_(store, name + ".o", d_model, d_model) {
  if (d_model % heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) +
                      " not divisible by heads " + std::to_string(heads));
  }
}

Tensor MultiHeadAttention::operator()(const Tensor& query,
                                      const Tensor& memory) const {
  return o_(Attention(q_(query), k_(memory), v_(memory), heads_));
}

FeedForward::FeedForward(ParameterStore& store, const std::string& name,
                         int d_model, int hidden)
    : up_(store, name + ".up", d_model, hidden),
      down_(store, name + ".down", hidden, d_model) {}

Tensor FeedForward::operator()(const Tensor& x) const {
  return down_(Relu(up_(x)));
}

EncoderLayer::EncoderLayer(ParameterStore& store, const std::string& name,
                           int d_model, int heads, int ff_hidden)
    : norm1_(store, name + ".norm1", d_model),
      norm2_(store, name + ".norm2", d_model),
      attn_(store, name + ".attn", d_model, heads),
      ff_(store, name + ".ff", d_model, ff_hidden) {}

Tensor EncoderLayer::operator()(const Tensor& x) const {
  Tensor h = norm1_(x);
  Tensor y = Add(x, attn_(h, h));
  return Add(y, ff_(norm2_(y)));
}

DecoderLayer::DecoderLayer(ParameterStore& store, const std::string& name,
                           int d_model, int heads, int ff_hidden)
    : norm1_(store, name + ".norm1", d_model),
      norm2_(store, name + ".norm2", d_model),
      norm3_(store, name + ".norm3", d_model),
      self_attn_(store, name + ".self_attn", d_model, heads),
      cross_attn_(store, name + ".cross_attn", d_model, heads),
      ff_(store, name + ".ff", d_model, ff_hidden) {}

Tensor DecoderLayer::operator()(const Tensor& x, const Tensor& memory) const {
  Tensor h = norm1_(x);
  Tensor y = Add(x, self_attn_(h, h));
  y = Add(y, cross_attn_(norm2_(y), memory));
  return Add(y, ff_(norm3_(y)));
}

TransformerEncoder::TransformerEncoder(ParameterStore& store,
                                       const std::string& name, int layers,
                                       int d_model, int heads, int ff_hidden) {
  for (int i = 0; i < layers; ++i) {
    layers_.emplace_back(store, name + ".layer" + std::to_string(i), d_model,
                         heads, ff_hidden);
  }
  final_norm_ = LayerNormAffine(store, name + ".final_norm", d_model);
}

Tensor TransformerEncoder::operator()(const Tensor& x) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = layer(h);
  return final_norm_(h);
}

TransformerDecoder::TransformerDecoder(ParameterStore& store,
                                       const std::string& name, int layers,
                                       int d_model, int heads, int ff_hidden) {
  for (int i = 0; i < layers; ++i) {
    layers_.emplace_back(store, name + ".layer" + std::to_string(i), d_model,
                         heads, ff_hidden);
  }
  final_norm_ = LayerNormAffine(store, name + ".final_norm", d_model);
}

Tensor TransformerDecoder::operator()(const Tensor& x,
                                      const Tensor& memory) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = layer(h, memory);
  return final_norm_(h);
}

Conv2d::Conv2d(ParameterStore& store, const std::string& name, int in_channels,
               int out_channels, int kernel, int stride, int padding)
    : kernel_(kernel),
      stride_(stride),
      padding_(padding),
      out_channels_(out_channels) {
  const int fan_in = in_channels * kernel * kernel;
  weight_ = store.Uniform(name + ".weight", {fan_in, out_channels},
                          1.0 / std::sqrt(static_cast<double>(fan_in)));
  bias_ = store.Constant(name + ".bias", {out_channels}, 0.0);
}

Tensor Conv2d::operator()(const Tensor& image) const {
  const int out_h = ConvOutputExtent(static_cast<int>(image.dim(1)), kernel_,
                                     stride_, padding_);
  const int out_w = ConvOutputExtent(static_cast<int>(image.dim(2)), kernel_,
                                     stride_, padding_);
  Tensor cols = Im2Col(image, kernel_, stride_, padding_);
  Tensor y = ghcbc::Linear(cols, weight_, bias_);  // (H_out*W_out, C_out)
  return Reshape(Transpose(y), {out_channels_, out_h, out_w});
}

Tensor SinusoidalTable(int positions, int width) {
  std::vector<double> table(static_cast<size_t>(positions) * width);
  for (int p = 0; p < positions; ++p) {
    for (int i = 0; i < width; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / width);
      table[p * width + i] = std::sin(p * freq);
      if (i + 1 < width) table[p * width + i + 1] = std::cos(p * freq);
    }
  }
  return Tensor::FromVector({positions, width}, std::move(table));
}

}  // namespace ghcbc::nn
