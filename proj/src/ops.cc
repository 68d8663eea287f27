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

#include "ghcbc/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

using BackwardFn = std::function<void(TensorImpl&)>;

// Builds the output tensor and, if any input tracks gradients, attaches the
// backward rule. Inputs that are undefined are skipped.
Tensor Record(Shape shape, std::vector<double> data,
              std::initializer_list<const Tensor*> inputs, BackwardFn fn) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  if (GradEnabled()) {
    bool any = false;
    for (const Tensor* t : inputs) {
      if (t->defined() && t->requires_grad()) any = true;
    }
    if (any) {
      impl->requires_grad = true;
      for (const Tensor* t : inputs) {
        impl->parents.push_back(t->defined() ? t->shared_impl() : nullptr);
      }
      impl->backward_fn = std::move(fn);
    }
  }
  return Tensor(std::move(impl));
}

// Parent `i` of `out` if it wants a gradient, else nullptr. Grad storage is
// allocated on demand.
TensorImpl* GradTarget(TensorImpl& out, size_t i) {
  TensorImpl* p = out.parents[i].get();
  if (p == nullptr || !p->requires_grad) return nullptr;
  p->EnsureGrad();
  return p;
}

void RequireRank(const Tensor& t, int rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + " expects rank " +
                         std::to_string(rank) + ", got shape " +
                         ShapeToString(t.shape()));
  }
}

int NormalizeAxis(const Tensor& t, int axis) {
  int r = t.rank();
  int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + ShapeToString(t.shape()));
  }
  return a;
}

struct AxisSplit {
  int64_t outer;
  int64_t extent;
  int64_t inner;
};

AxisSplit SplitAt(const Shape& shape, int axis) {
  AxisSplit s{1, shape[axis], 1};
  for (int i = 0; i < axis; ++i) s.outer *= shape[i];
  for (size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

bool IsSuffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

enum class BinaryKind { kAdd, kSub, kMul };

Tensor Binary(BinaryKind kind, const Tensor& a, const Tensor& b) {
  const Shape* out_shape = nullptr;
  if (a.shape() == b.shape() || IsSuffix(b.shape(), a.shape())) {
    out_shape = &a.shape();
  } else if (IsSuffix(a.shape(), b.shape())) {
    out_shape = &b.shape();
  } else {
    throw DimensionError("shapes " + ShapeToString(a.shape()) + " and " +
                         ShapeToString(b.shape()) + " are not broadcastable");
  }
  const int64_t n = NumElements(*out_shape);
  const int64_t na = a.numel();
  const int64_t nb = b.numel();
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(n);
  for (int64_t i = 0; i < n; ++i) {
    double x = ad[i % na];
    double y = bd[i % nb];
    switch (kind) {
      case BinaryKind::kAdd: out[i] = x + y; break;
      case BinaryKind::kSub: out[i] = x - y; break;
      case BinaryKind::kMul: out[i] = x * y; break;
    }
  }
  return Record(*out_shape, std::move(out), {&a, &b},
                [kind, na, nb](TensorImpl& o) {
                  const int64_t n = static_cast<int64_t>(o.grad.size());
                  const TensorImpl* pa = o.parents[0].get();
                  const TensorImpl* pb = o.parents[1].get();
                  if (TensorImpl* ga = GradTarget(o, 0)) {
                    for (int64_t i = 0; i < n; ++i) {
                      double g = o.grad[i];
                      if (kind == BinaryKind::kMul) g *= pb->data[i % nb];
                      ga->grad[i % na] += g;
                    }
                  }
                  if (TensorImpl* gb = GradTarget(o, 1)) {
                    for (int64_t i = 0; i < n; ++i) {
                      double g = o.grad[i];
                      if (kind == BinaryKind::kSub) g = -g;
                      if (kind == BinaryKind::kMul) g *= pa->data[i % na];
                      gb->grad[i % nb] += g;
                    }
                  }
                });
}

// Unary op whose derivative is a function of (input, output).
template <typename Forward, typename Derivative>
Tensor Unary(const Tensor& a, Forward f, Derivative df) {
  auto ad = a.data();
  std::vector<double> out(ad.size());
  for (size_t i = 0; i < ad.size(); ++i) out[i] = f(ad[i]);
  return Record(a.shape(), std::move(out), {&a}, [df](TensorImpl& o) {
    TensorImpl* ga = GradTarget(o, 0);
    if (!ga) return;
    const auto& x = o.parents[0]->data;
    for (size_t i = 0; i < o.grad.size(); ++i) {
      ga->grad[i] += o.grad[i] * df(x[i], o.data[i]);
    }
  });
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul shape mismatch: " + ShapeToString(a.shape()) +
                         " x " + ShapeToString(b.shape()));
  }
  const int64_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  std::vector<double> out(n * m);
  MatMap(out.data(), n, m).noalias() =
      ConstMatMap(a.data().data(), n, k) * ConstMatMap(b.data().data(), k, m);
  return Record({n, m}, std::move(out), {&a, &b}, [n, k, m](TensorImpl& o) {
    ConstMatMap g(o.grad.data(), n, m);
    if (TensorImpl* ga = GradTarget(o, 0)) {
      MatMap(ga->grad.data(), n, k).noalias() +=
          g * ConstMatMap(o.parents[1]->data.data(), k, m).transpose();
    }
    if (TensorImpl* gb = GradTarget(o, 1)) {
      MatMap(gb->grad.data(), k, m).noalias() +=
          ConstMatMap(o.parents[0]->data.data(), n, k).transpose() * g;
    }
  });
}

Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0)) {
    throw DimensionError("linear shape mismatch: " + ShapeToString(x.shape()) +
                         " x " + ShapeToString(w.shape()));
  }
  const int64_t n = x.dim(0), k = x.dim(1), m = w.dim(1);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != m)) {
    throw DimensionError("linear bias shape " + ShapeToString(bias.shape()) +
                         " does not match output width " + std::to_string(m));
  }
  std::vector<double> out(n * m);
  MatMap y(out.data(), n, m);
  y.noalias() =
      ConstMatMap(x.data().data(), n, k) * ConstMatMap(w.data().data(), k, m);
  if (bias.defined()) {
    y.rowwise() += ConstVecMap(bias.data().data(), m).transpose();
  }
  return Record({n, m}, std::move(out), {&x, &w, &bias},
                [n, k, m](TensorImpl& o) {
                  ConstMatMap g(o.grad.data(), n, m);
                  if (TensorImpl* gx = GradTarget(o, 0)) {
                    MatMap(gx->grad.data(), n, k).noalias() +=
                        g * ConstMatMap(o.parents[1]->data.data(), k, m)
                                .transpose();
                  }
                  if (TensorImpl* gw = GradTarget(o, 1)) {
                    MatMap(gw->grad.data(), k, m).noalias() +=
                        ConstMatMap(o.parents[0]->data.data(), n, k)
                            .transpose() *
                        g;
                  }
                  if (TensorImpl* gb = GradTarget(o, 2)) {
                    VecMap(gb->grad.data(), m) += g.colwise().sum().transpose();
                  }
                });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  return Binary(BinaryKind::kAdd, a, b);
}
Tensor Sub(const Tensor& a, const Tensor& b) {
  return Binary(BinaryKind::kSub, a, b);
}
Tensor Mul(const Tensor& a, const Tensor& b) {
  return Binary(BinaryKind::kMul, a, b);
}

Tensor Scale(const Tensor& a, double factor) {
  return Unary(
      a, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor AddScalar(const Tensor& a, double value) {
  return Unary(
      a, [value](double x) { return x + value; },
      [](double, double) { return 1.0; });
}

Tensor Relu(const Tensor& a) {
  return Unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor Gelu(const Tensor& a) {
  return Unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); },
      [](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
        const double pdf =
            std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi /
            std::numbers::sqrt2;
        return cdf + x * pdf;
      });
}

Tensor Exp(const Tensor& a) {
  return Unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor Log(const Tensor& a) {
  return Unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor Elementwise(ElementwiseKind kind, const Tensor& a, const Tensor& b) {
  switch (kind) {
    case ElementwiseKind::kAdd: return Add(a, b);
    case ElementwiseKind::kSub: return Sub(a, b);
    case ElementwiseKind::kMul: return Mul(a, b);
    case ElementwiseKind::kRelu: return Relu(a);
    case ElementwiseKind::kGelu: return Gelu(a);
    case ElementwiseKind::kExp: return Exp(a);
    case ElementwiseKind::kLog: return Log(a);
  }
  throw ContractError("unknown elementwise kind");
}

Tensor Sum(const Tensor& a) {
  double total = 0.0;
  for (double x : a.data()) total += x;
  return Record({1}, {total}, {&a}, [](TensorImpl& o) {
    if (TensorImpl* ga = GradTarget(o, 0)) {
      for (double& g : ga->grad) g += o.grad[0];
    }
  });
}

Tensor Mean(const Tensor& a) { return Scale(Sum(a), 1.0 / a.numel()); }

Tensor SumAxis(const Tensor& a, int axis) {
  const int ax = NormalizeAxis(a, axis);
  const AxisSplit s = SplitAt(a.shape(), ax);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + ax);
  if (out_shape.empty()) out_shape = {1};
  std::vector<double> out(s.outer * s.inner, 0.0);
  auto ad = a.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t e = 0; e < s.extent; ++e) {
      const double* src = &ad[(o * s.extent + e) * s.inner];
      double* dst = &out[o * s.inner];
      for (int64_t i = 0; i < s.inner; ++i) dst[i] += src[i];
    }
  }
  return Record(std::move(out_shape), std::move(out), {&a}, [s](TensorImpl& o) {
    TensorImpl* ga = GradTarget(o, 0);
    if (!ga) return;
    for (int64_t ou = 0; ou < s.outer; ++ou) {
      for (int64_t e = 0; e < s.extent; ++e) {
        double* dst = &ga->grad[(ou * s.extent + e) * s.inner];
        const double* src = &o.grad[ou * s.inner];
        for (int64_t i = 0; i < s.inner; ++i) dst[i] += src[i];
      }
    }
  });
}

Tensor MeanAxis(const Tensor& a, int axis) {
  const int ax = NormalizeAxis(a, axis);
  return Scale(SumAxis(a, ax), 1.0 / static_cast<double>(a.shape()[ax]));
}

Tensor Concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const Tensor& first = parts.front();
  const int ax = NormalizeAxis(first, axis);
  Shape out_shape = first.shape();
  out_shape[ax] = 0;
  for (const Tensor& p : parts) {
    bool ok = p.rank() == first.rank();
    for (int i = 0; ok && i < first.rank(); ++i) {
      if (i != ax && p.shape()[i] != first.shape()[i]) ok = false;
    }
    if (!ok) {
      throw DimensionError("concat operands disagree: " +
                           ShapeToString(first.shape()) + " vs " +
                           ShapeToString(p.shape()) + " on axis " +
                           std::to_string(ax));
    }
    out_shape[ax] += p.shape()[ax];
  }
  const AxisSplit s = SplitAt(out_shape, ax);
  std::vector<double> out(NumElements(out_shape));
  std::vector<int64_t> blocks;
  int64_t offset = 0;
  for (const Tensor& p : parts) {
    const int64_t block = p.shape()[ax] * s.inner;
    auto pd = p.data();
    for (int64_t o = 0; o < s.outer; ++o) {
      std::copy_n(&pd[o * block], block,
                  &out[o * s.extent * s.inner + offset]);
    }
    blocks.push_back(block);
    offset += block;
  }

  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(out_shape);
  impl->data = std::move(out);
  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  if (GradEnabled() && any) {
    impl->requires_grad = true;
    for (const Tensor& p : parts) impl->parents.push_back(p.shared_impl());
    const int64_t row = s.extent * s.inner;
    const int64_t outer = s.outer;
    impl->backward_fn = [blocks, row, outer](TensorImpl& o) {
      int64_t off = 0;
      for (size_t i = 0; i < blocks.size(); ++i) {
        if (TensorImpl* g = GradTarget(o, i)) {
          for (int64_t ou = 0; ou < outer; ++ou) {
            const double* src = &o.grad[ou * row + off];
            double* dst = &g->grad[ou * blocks[i]];
            for (int64_t j = 0; j < blocks[i]; ++j) dst[j] += src[j];
          }
        }
        off += blocks[i];
      }
    };
  }
  return Tensor(std::move(impl));
}

Tensor Slice(const Tensor& a, int axis, int64_t start, int64_t length) {
  const int ax = NormalizeAxis(a, axis);
  if (start < 0 || length <= 0 || start + length > a.shape()[ax]) {
    throw DimensionError("slice [" + std::to_string(start) + ", " +
                         std::to_string(start + length) +
                         ") out of range for shape " + ShapeToString(a.shape()));
  }
  const AxisSplit s = SplitAt(a.shape(), ax);
  Shape out_shape = a.shape();
  out_shape[ax] = length;
  const int64_t block = length * s.inner;
  const int64_t row = s.extent * s.inner;
  const int64_t offset = start * s.inner;
  std::vector<double> out(s.outer * block);
  auto ad = a.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    std::copy_n(&ad[o * row + offset], block, &out[o * block]);
  }
  return Record(std::move(out_shape), std::move(out), {&a},
                [s, block, row, offset](TensorImpl& o) {
                  TensorImpl* ga = GradTarget(o, 0);
                  if (!ga) return;
                  for (int64_t ou = 0; ou < s.outer; ++ou) {
                    const double* src = &o.grad[ou * block];
                    double* dst = &ga->grad[ou * row + offset];
                    for (int64_t j = 0; j < block; ++j) dst[j] += src[j];
                  }
                });
}

std::vector<Tensor> Split(const Tensor& a, int axis,
                          const std::vector<int64_t>& sizes) {
  const int ax = NormalizeAxis(a, axis);
  int64_t total = 0;
  for (int64_t s : sizes) total += s;
  if (total != a.shape()[ax]) {
    throw DimensionError("split sizes sum to " + std::to_string(total) +
                         " but axis extent is " +
                         std::to_string(a.shape()[ax]));
  }
  std::vector<Tensor> out;
  int64_t start = 0;
  for (int64_t s : sizes) {
    out.push_back(Slice(a, ax, start, s));
    start += s;
  }
  return out;
}

Tensor Reshape(const Tensor& a, Shape shape) {
  if (NumElements(shape) != a.numel()) {
    throw DimensionError("cannot reshape " + ShapeToString(a.shape()) +
                         " to " + ShapeToString(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return Record(std::move(shape), std::move(out), {&a}, [](TensorImpl& o) {
    TensorImpl* ga = GradTarget(o, 0);
    if (!ga) return;
    for (size_t i = 0; i < o.grad.size(); ++i) ga->grad[i] += o.grad[i];
  });
}

Tensor Transpose(const Tensor& a) {
  RequireRank(a, 2, "transpose");
  const int64_t n = a.dim(0), m = a.dim(1);
  std::vector<double> out(n * m);
  MatMap(out.data(), m, n) = ConstMatMap(a.data().data(), n, m).transpose();
  return Record({m, n}, std::move(out), {&a}, [n, m](TensorImpl& o) {
    TensorImpl* ga = GradTarget(o, 0);
    if (!ga) return;
    MatMap(ga->grad.data(), n, m) +=
        ConstMatMap(o.grad.data(), m, n).transpose();
  });
}

Tensor Softmax(const Tensor& a) {
  const int64_t width = a.dim(-1);
  const int64_t rows = a.numel() / width;
  std::vector<double> out(a.numel());
  auto ad = a.data();
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = &ad[r * width];
    double* y = &out[r * width];
    const double peak = *std::max_element(x, x + width);
    double total = 0.0;
    for (int64_t j = 0; j < width; ++j) {
      y[j] = std::exp(x[j] - peak);
      total += y[j];
    }
    for (int64_t j = 0; j < width; ++j) y[j] /= total;
  }
  return Record(a.shape(), std::move(out), {&a}, [rows, width](TensorImpl& o) {
    TensorImpl* ga = GradTarget(o, 0);
    if (!ga) return;
    for (int64_t r = 0; r < rows; ++r) {
      const double* y = &o.data[r * width];
      const double* gy = &o.grad[r * width];
      double dot = 0.0;
      for (int64_t j = 0; j < width; ++j) dot += gy[j] * y[j];
      double* gx = &ga->grad[r * width];
      for (int64_t j = 0; j < width; ++j) gx[j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor LayerNorm(const Tensor& a, double eps) {
  const int64_t width = a.dim(-1);
  const int64_t rows = a.numel() / width;
  std::vector<double> out(a.numel());
  std::vector<double> inv_std(rows);
  auto ad = a.data();
  for (int64_t r = 0; r < rows; ++r) {
    const double* x = &ad[r * width];
    double mean = 0.0;
    for (int64_t j = 0; j < width; ++j) mean += x[j];
    mean /= width;
    double var = 0.0;
    for (int64_t j = 0; j < width; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= width;
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (int64_t j = 0; j < width; ++j) {
      out[r * width + j] = (x[j] - mean) * inv_std[r];
    }
  }
  return Record(a.shape(), std::move(out), {&a},
                [rows, width, inv_std = std::move(inv_std)](TensorImpl& o) {
                  TensorImpl* ga = GradTarget(o, 0);
                  if (!ga) return;
                  for (int64_t r = 0; r < rows; ++r) {
                    const double* xh = &o.data[r * width];
                    const double* gy = &o.grad[r * width];
                    double mean_g = 0.0, mean_gx = 0.0;
                    for (int64_t j = 0; j < width; ++j) {
                      mean_g += gy[j];
                      mean_gx += gy[j] * xh[j];
                    }
                    mean_g /= width;
                    mean_gx /= width;
                    double* gx = &ga->grad[r * width];
                    for (int64_t j = 0; j < width; ++j) {
                      gx[j] += inv_std[r] * (gy[j] - mean_g - xh[j] * mean_gx);
                    }
                  }
                });
}

int ConvOutputExtent(int extent, int kernel, int stride, int padding) {
  return (extent + 2 * padding - kernel) / stride + 1;
}

Tensor Im2Col(const Tensor& image, int kernel, int stride, int padding) {
  RequireRank(image, 3, "im2col");
  const int channels = static_cast<int>(image.dim(0));
  const int height = static_cast<int>(image.dim(1));
  const int width = static_cast<int>(image.dim(2));
  const int out_h = ConvOutputExtent(height, kernel, stride, padding);
  const int out_w = ConvOutputExtent(width, kernel, stride, padding);
  if (out_h <= 0 || out_w <= 0) {
    throw DimensionError("image " + ShapeToString(image.shape()) +
                         " too small for kernel " + std::to_string(kernel));
  }
  const int64_t patch = static_cast<int64_t>(channels) * kernel * kernel;
  // Flat source index per (output pixel, patch entry); -1 marks padding.
  std::vector<int64_t> index(static_cast<int64_t>(out_h) * out_w * patch);
  std::vector<double> out(index.size(), 0.0);
  auto src = image.data();
  int64_t pos = 0;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int c = 0; c < channels; ++c) {
        for (int ky = 0; ky < kernel; ++ky) {
          for (int kx = 0; kx < kernel; ++kx, ++pos) {
            const int y = oy * stride + ky - padding;
            const int x = ox * stride + kx - padding;
            if (y < 0 || y >= height || x < 0 || x >= width) {
              index[pos] = -1;
            } else {
              index[pos] = (static_cast<int64_t>(c) * height + y) * width + x;
              out[pos] = src[index[pos]];
            }
          }
        }
      }
    }
  }
  return Record({static_cast<int64_t>(out_h) * out_w, patch}, std::move(out),
                {&image}, [index = std::move(index)](TensorImpl& o) {
                  TensorImpl* ga = GradTarget(o, 0);
                  if (!ga) return;
                  for (size_t i = 0; i < index.size(); ++i) {
                    if (index[i] >= 0) ga->grad[index[i]] += o.grad[i];
                  }
                });
}

Tensor Attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 int heads) {
  RequireRank(q, 2, "attention");
  RequireRank(k, 2, "attention");
  RequireRank(v, 2, "attention");
  const int64_t n = q.dim(0), m = k.dim(0), d = q.dim(1);
  if (k.dim(1) != d || v.dim(1) != d || v.dim(0) != m) {
    throw DimensionError("attention shape mismatch: q " +
                         ShapeToString(q.shape()) + ", k " +
                         ShapeToString(k.shape()) + ", v " +
                         ShapeToString(v.shape()));
  }
  if (heads <= 0 || d % heads != 0) {
    throw DimensionError("width " + std::to_string(d) +
                         " not divisible by head count " +
                         std::to_string(heads));
  }
  const int64_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> out(n * d);
  std::vector<double> probs(static_cast<int64_t>(heads) * n * m);
  for (int h = 0; h < heads; ++h) {
    ConstStridedMap qh(q.data().data() + h * dh, n, dh, Eigen::OuterStride<>(d));
    ConstStridedMap kh(k.data().data() + h * dh, m, dh, Eigen::OuterStride<>(d));
    ConstStridedMap vh(v.data().data() + h * dh, m, dh, Eigen::OuterStride<>(d));
    MatMap p(probs.data() + h * n * m, n, m);
    p.noalias() = (qh * kh.transpose()) * scale;
    for (int64_t r = 0; r < n; ++r) {
      const double peak = p.row(r).maxCoeff();
      p.row(r) = (p.row(r).array() - peak).exp();
      p.row(r) /= p.row(r).sum();
    }
    StridedMap(out.data() + h * dh, n, dh, Eigen::OuterStride<>(d)).noalias() =
        p * vh;
  }
  return Record(
      {n, d}, std::move(out), {&q, &k, &v},
      [n, m, d, dh, heads, scale, probs = std::move(probs)](TensorImpl& o) {
        TensorImpl* gq = GradTarget(o, 0);
        TensorImpl* gk = GradTarget(o, 1);
        TensorImpl* gv = GradTarget(o, 2);
        const double* qd = o.parents[0]->data.data();
        const double* kd = o.parents[1]->data.data();
        const double* vd = o.parents[2]->data.data();
        RowMat dp(n, m);
        for (int h = 0; h < heads; ++h) {
          ConstMatMap p(probs.data() + h * n * m, n, m);
          ConstStridedMap go(o.grad.data() + h * dh, n, dh,
                             Eigen::OuterStride<>(d));
          ConstStridedMap vh(vd + h * dh, m, dh, Eigen::OuterStride<>(d));
          if (gv) {
            StridedMap(gv->grad.data() + h * dh, m, dh, Eigen::OuterStride<>(d))
                .noalias() += p.transpose() * go;
          }
          if (!gq && !gk) continue;
          dp.noalias() = go * vh.transpose();
          for (int64_t r = 0; r < n; ++r) {
            const double dot = dp.row(r).dot(p.row(r));
            dp.row(r) = (p.row(r).array() * (dp.row(r).array() - dot)) * scale;
          }
          if (gq) {
            ConstStridedMap kh(kd + h * dh, m, dh, Eigen::OuterStride<>(d));
            StridedMap(gq->grad.data() + h * dh, n, dh, Eigen::OuterStride<>(d))
                .noalias() += dp * kh;
          }
          if (gk) {
            ConstStridedMap qh(qd + h * dh, n, dh, Eigen::OuterStride<>(d));
            StridedMap(gk->grad.data() + h * dh, m, dh, Eigen::OuterStride<>(d))
                .noalias() += dp.transpose() * qh;
          }
        }
      });
}

}  // namespace ghcbc
