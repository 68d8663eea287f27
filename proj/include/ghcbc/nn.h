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

#ifndef GHCBC_NN_H_
#define GHCBC_NN_H_

#include <string>
#include <vector>

#include "ghcbc/ops.h"
#include "ghcbc/parameters.h"

namespace ghcbc::nn {

// Row-wise affine map; weights stored (in, out).
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out,
         bool bias = true);
  Tensor operator()(const Tensor& x) const;

  int in() const { return in_; }
  int out() const { return out_; }
  const Tensor& weight() const { return weight_; }

 private:
  int in_ = 0;
  int out_ = 0;
  Tensor weight_;
  Tensor bias_;
};

class LayerNormAffine {
 public:
  LayerNormAffine() = default;
  LayerNormAffine(ParameterStore& store, const std::string& name, int width);
  Tensor operator()(const Tensor& x) const;

 private:
  Tensor gamma_;
  Tensor beta_;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, const std::string& name,
                     int d_model, int heads);
  // query (n,d) attends over memory (m,d).
  Tensor operator()(const Tensor& query, const Tensor& memory) const;

 private:
  int heads_ = 1;
  Linear q_, k_, v_, o_;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, const std::string& name, int d_model,
              int hidden);
  Tensor operator()(const Tensor& x) const;

 private:
  Linear up_, down_;
};

// Pre-norm block: x + SelfAttn(LN(x)), then x + FF(LN(x)).
class EncoderLayer {
 public:
  EncoderLayer(ParameterStore& store, const std::string& name, int d_model,
               int heads, int ff_hidden);
  Tensor operator()(const Tensor& x) const;

 private:
  LayerNormAffine norm1_, norm2_;
  MultiHeadAttention attn_;
  FeedForward ff_;
};

// Pre-norm block with self-attention, cross-attention over memory, FF.
class DecoderLayer {
 public:
  DecoderLayer(ParameterStore& store, const std::string& name, int d_model,
               int heads, int ff_hidden);
  Tensor operator()(const Tensor& x, const Tensor& memory) const;

 private:
  LayerNormAffine norm1_, norm2_, norm3_;
  MultiHeadAttention self_attn_, cross_attn_;
  FeedForward ff_;
};

class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(ParameterStore& store, const std::string& name,
                     int layers, int d_model, int heads, int ff_hidden);
  Tensor operator()(const Tensor& x) const;
  int num_layers() const { return static_cast<int>(layers_.size()); }

 private:
  std::vector<EncoderLayer> layers_;
  LayerNormAffine final_norm_;
};

class TransformerDecoder {
 public:
  TransformerDecoder() = default;
  TransformerDecoder(ParameterStore& store, const std::string& name,
                     int layers, int d_model, int heads, int ff_hidden);
  Tensor operator()(const Tensor& x, const Tensor& memory) const;
  int num_layers() const { return static_cast<int>(layers_.size()); }

 private:
  std::vector<DecoderLayer> layers_;
  LayerNormAffine final_norm_;
};

// Convolution as im2col + matmul. Input (C,H,W), output (C_out,H_out,W_out).
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterStore& store, const std::string& name, int in_channels,
         int out_channels, int kernel, int stride, int padding);
  Tensor operator()(const Tensor& image) const;

 private:
  int kernel_ = 3;
  int stride_ = 1;
  int padding_ = 0;
  int out_channels_ = 0;
  Tensor weight_;
  Tensor bias_;
};

// Fixed sinusoidal table (positions, width): column 2i holds
// sin(p / 10000^(2i/width)), column 2i+1 the matching cosine.
Tensor SinusoidalTable(int positions, int width);

}  // namespace ghcbc::nn

#endif  // GHCBC_NN_H_
