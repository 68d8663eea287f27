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

#ifndef GHCBC_TENSOR_H_
#define GHCBC_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ghcbc {

using Shape = std::vector<int64_t>;

std::string ShapeToString(const Shape& shape);
int64_t NumElements(const Shape& shape);

// Storage and backward-graph record behind a Tensor handle. Gradient storage
// is allocated lazily the first time a backward pass reaches the node.
struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(TensorImpl&)> backward_fn;

  void EnsureGrad();
};

// Dense row-major float64 tensor with reverse-mode gradient tracking.
//
// Handles share storage; copying a Tensor does not copy data. Values are
// treated as immutable once an operation has produced them, the only
// writers being the optimizer and checkpoint loading.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor Zeros(Shape shape);
  static Tensor Full(Shape shape, double value);
  static Tensor FromVector(Shape shape, std::vector<double> data);
  // Leaf tensor that collects gradients.
  static Tensor Parameter(Shape shape, std::vector<double> data);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  // Extent along `axis`; negative axes count from the back.
  int64_t dim(int axis) const;
  int64_t numel() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  bool requires_grad() const;
  bool has_grad() const;
  void ZeroGrad();

  double item() const;
  double at(std::initializer_list<int64_t> index) const;

  // Seeds this tensor's gradient with `seed` (every element) and propagates
  // through the recorded graph in reverse topological order.
  void Backward(double seed = 1.0) const;

  // Same data, no graph history, no gradient tracking.
  Tensor Detach() const;

  TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl>& shared_impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Gradient recording is on by default; NoGradGuard turns it off for the
// current thread (inference, stop-gradient feature extraction).
bool GradEnabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace ghcbc

#endif  // GHCBC_TENSOR_H_
