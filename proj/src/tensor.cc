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

#include "ghcbc/tensor.h"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

thread_local bool grad_enabled = true;

}  // namespace

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ",";
    out << shape[i];
  }
  out << ")";
  return out.str();
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t extent : shape) n *= extent;
  return n;
}

void TensorImpl::EnsureGrad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

namespace {

void CheckShape(const Shape& shape) {
  if (shape.empty()) {
    throw DimensionError("tensor shape must have at least one extent");
  }
  for (int64_t extent : shape) {
    if (extent <= 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           ShapeToString(shape));
    }
  }
}

}  // namespace

Tensor Tensor::Zeros(Shape shape) { return Full(std::move(shape), 0.0); }

Tensor Tensor::Full(Shape shape, double value) {
  CheckShape(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->data.assign(NumElements(shape), value);
  impl->shape = std::move(shape);
  return Tensor(std::move(impl));
}

Tensor Tensor::FromVector(Shape shape, std::vector<double> data) {
  CheckShape(shape);
  if (NumElements(shape) != static_cast<int64_t>(data.size())) {
    throw DimensionError("data length " + std::to_string(data.size()) +
                         " does not match shape " + ShapeToString(shape));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  return Tensor(std::move(impl));
}

Tensor Tensor::Parameter(Shape shape, std::vector<double> data) {
  Tensor t = FromVector(std::move(shape), std::move(data));
  t.impl_->requires_grad = true;
  return t;
}

const Shape& Tensor::shape() const { return impl_->shape; }

int Tensor::rank() const { return static_cast<int>(impl_->shape.size()); }

int64_t Tensor::dim(int axis) const {
  int r = rank();
  int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + ShapeToString(shape()));
  }
  return impl_->shape[a];
}

int64_t Tensor::numel() const {
  return static_cast<int64_t>(impl_->data.size());
}

std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }
std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() {
  impl_->EnsureGrad();
  return impl_->grad;
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
bool Tensor::has_grad() const { return !impl_->grad.empty(); }

void Tensor::ZeroGrad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() needs a single-element tensor, got " +
                         ShapeToString(shape()));
  }
  return impl_->data[0];
}

double Tensor::at(std::initializer_list<int64_t> index) const {
  if (static_cast<int>(index.size()) != rank()) {
    throw DimensionError("index rank does not match shape " +
                         ShapeToString(shape()));
  }
  int64_t flat = 0;
  int axis = 0;
  for (int64_t i : index) {
    if (i < 0 || i >= impl_->shape[axis]) {
      throw DimensionError("index out of range for shape " +
                           ShapeToString(shape()));
    }
    flat = flat * impl_->shape[axis] + i;
    ++axis;
  }
  return impl_->data[flat];
}

void Tensor::Backward(double seed) const {
  if (!impl_->requires_grad) {
    throw StateError("backward called on a tensor that does not require grad");
  }
  // Iterative post-order DFS gives a topological order of the tape.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, size_t>> stack;
  stack.emplace_back(impl_.get(), 0);
  visited.insert(impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl* parent = node->parents[next++].get();
      if (parent && parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  impl_->EnsureGrad();
  for (double& g : impl_->grad) g += seed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
}

Tensor Tensor::Detach() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

bool GradEnabled() { return grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

}  // namespace ghcbc
