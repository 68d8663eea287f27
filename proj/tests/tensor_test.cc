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

#include <gtest/gtest.h>

#include "ghcbc/errors.h"
#include "ghcbc/ops.h"

namespace ghcbc {
namespace {

TEST(TensorTest, FactoriesAndAccessors) {
  Tensor z = Tensor::Zeros({2, 3});
  EXPECT_EQ(z.rank(), 2);
  EXPECT_EQ(z.numel(), 6);
  EXPECT_EQ(z.dim(-1), 3);
  EXPECT_FALSE(z.requires_grad());
  Tensor f = Tensor::FromVector({2, 2}, {1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(f.at({1, 0}), 3.0);
  EXPECT_EQ(ShapeToString(f.shape()), "(2,2)");
  EXPECT_THROW(Tensor::FromVector({2, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(f.item(), DimensionError);
}

TEST(TensorTest, BackwardThroughSharedNode) {
  Tensor x = Tensor::Parameter({1}, {3.0});
  Tensor y = Mul(x, x);  // x^2
  Tensor z = Add(y, y);  // 2 x^2
  z.Backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(TensorTest, GradientsAccumulateUntilZeroed) {
  Tensor x = Tensor::Parameter({2}, {1.0, 2.0});
  Sum(x).Backward();
  Sum(x).Backward();
  EXPECT_DOUBLE_EQ(x.grad()[1], 2.0);
  x.ZeroGrad();
  EXPECT_DOUBLE_EQ(x.grad()[1], 0.0);
}

TEST(TensorTest, NoGradGuardSkipsRecording) {
  Tensor x = Tensor::Parameter({2}, {1.0, 2.0});
  {
    NoGradGuard guard;
    EXPECT_FALSE(GradEnabled());
    Tensor y = Scale(x, 2.0);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(GradEnabled());
  EXPECT_TRUE(Scale(x, 2.0).requires_grad());
}

TEST(TensorTest, DetachStopsGradient) {
  Tensor x = Tensor::Parameter({1}, {2.0});
  Tensor y = Add(Mul(x, x), x.Detach());
  y.Backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 4.0);
}

TEST(TensorTest, BackwardOnConstantIsStateError) {
  Tensor c = Tensor::FromVector({1}, {1.0});
  EXPECT_THROW(c.Backward(), StateError);
}

}  // namespace
}  // namespace ghcbc
