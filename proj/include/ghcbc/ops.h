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

#ifndef GHCBC_OPS_H_
#define GHCBC_OPS_H_

#include <vector>

#include "ghcbc/tensor.h"

namespace ghcbc {

// Differentiable tensor operations. Every function records a backward rule
// when gradient mode is on and at least one input requires grad.
//
// Binary elementwise ops accept equal shapes, or one operand whose shape is
// a suffix of the other's (leading-dimension expansion). Nothing else is
// broadcast.

// (n,k) x (k,m) -> (n,m).
Tensor MatMul(const Tensor& a, const Tensor& b);
// x (n,in) * w (in,out) + bias (out). `bias` may be undefined.
Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& bias);

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double factor);
Tensor AddScalar(const Tensor& a, double value);

Tensor Relu(const Tensor& a);
// Exact (erf) formulation.
Tensor Gelu(const Tensor& a);
Tensor Exp(const Tensor& a);
Tensor Log(const Tensor& a);

enum class ElementwiseKind { kAdd, kSub, kMul, kRelu, kGelu, kExp, kLog };
// Dispatch form of the functions above; `b` is ignored for unary kinds.
Tensor Elementwise(ElementwiseKind kind, const Tensor& a,
                   const Tensor& b = Tensor());

// Sum of all entries, shape (1).
Tensor Sum(const Tensor& a);
// Mean of all entries, shape (1).
Tensor Mean(const Tensor& a);
// Reduce one axis away. A rank-1 input reduces to shape (1).
Tensor SumAxis(const Tensor& a, int axis);
Tensor MeanAxis(const Tensor& a, int axis);

Tensor Concat(const std::vector<Tensor>& parts, int axis);
Tensor Slice(const Tensor& a, int axis, int64_t start, int64_t length);
std::vector<Tensor> Split(const Tensor& a, int axis,
                          const std::vector<int64_t>& sizes);
Tensor Reshape(const Tensor& a, Shape shape);
// Rank-2 transpose.
Tensor Transpose(const Tensor& a);

// Along the last axis.
Tensor Softmax(const Tensor& a);
// Normalizes the last axis to zero mean, unit variance. No affine terms.
Tensor LayerNorm(const Tensor& a, double eps = 1e-5);

// Unfolds a (C,H,W) image into (H_out*W_out, C*kernel*kernel) patches with
// zero padding; rows are output pixels in row-major order.
Tensor Im2Col(const Tensor& image, int kernel, int stride, int padding);
int ConvOutputExtent(int extent, int kernel, int stride, int padding);

// Multi-head scaled dot-product attention core, fused for speed.
// q (n,d), k (m,d), v (m,d) with d divisible by `heads`; returns (n,d).
// Head h uses columns [h*d/heads, (h+1)*d/heads).
Tensor Attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 int heads);

}  // namespace ghcbc

#endif  // GHCBC_OPS_H_
