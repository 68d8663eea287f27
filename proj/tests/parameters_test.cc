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

#include "ghcbc/parameters.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "ghcbc/errors.h"
#include "ghcbc/ops.h"

namespace ghcbc {
namespace {

std::filesystem::path TempPath(const std::string& name) {
  return std::filesystem::path(::testing::TempDir()) / name;
}

TEST(ParameterStoreTest, RegistersInOrderAndRejectsDuplicates) {
  ParameterStore store(7);
  store.Uniform("a", {2, 3}, 0.5);
  store.Constant("b", {4}, 1.0);
  ASSERT_EQ(store.parameters().size(), 2u);
  EXPECT_EQ(store.parameters()[1].name, "b");
  EXPECT_EQ(store.TotalSize(), 10);
  EXPECT_THROW(store.Constant("a", {1}, 0.0), ConfigError);
  EXPECT_THROW(store.Get("missing"), StateError);
  for (double v : store.Get("a").data()) EXPECT_LE(std::abs(v), 0.5);
}

TEST(ParameterStoreTest, SameSeedSameInit) {
  ParameterStore a(3), b(3);
  a.Normal("w", {5}, 1.0);
  b.Normal("w", {5}, 1.0);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(a.Get("w").data()[i], b.Get("w").data()[i]);
  }
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  ParameterStore a(11);
  a.Normal("x", {3, 2}, 1.0);
  a.Uniform("y", {4}, 2.0);
  const auto path = TempPath("roundtrip.ckpt");
  SaveCheckpoint(a, path);
  ParameterStore b(99);
  b.Normal("x", {3, 2}, 1.0);
  b.Uniform("y", {4}, 2.0);
  LoadCheckpoint(b, path);
  for (size_t p = 0; p < 2; ++p) {
    const auto da = a.parameters()[p].tensor.data();
    const auto db = b.parameters()[p].tensor.data();
    for (size_t i = 0; i < da.size(); ++i) EXPECT_EQ(da[i], db[i]);
  }
}

TEST(CheckpointTest, RejectsMismatchedManifest) {
  ParameterStore a(1);
  a.Normal("x", {3}, 1.0);
  const auto path = TempPath("mismatch.ckpt");
  SaveCheckpoint(a, path);
  ParameterStore wrong_shape(1);
  wrong_shape.Normal("x", {4}, 1.0);
  EXPECT_THROW(LoadCheckpoint(wrong_shape, path), IoError);
  ParameterStore wrong_name(1);
  wrong_name.Normal("z", {3}, 1.0);
  EXPECT_THROW(LoadCheckpoint(wrong_name, path), IoError);
  EXPECT_THROW(LoadCheckpoint(a, TempPath("absent.ckpt")), IoError);
}

TEST(CheckpointTest, RejectsTruncatedPayload) {
  ParameterStore a(1);
  a.Normal("x", {8}, 1.0);
  const auto path = TempPath("truncated.ckpt");
  SaveCheckpoint(a, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 4);
  EXPECT_THROW(LoadCheckpoint(a, path), IoError);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ParameterStore store;
  Tensor w = store.Constant("w", {2}, 1.0);
  Sum(Mul(w, Tensor::FromVector({2}, {3.0, -0.5}))).Backward();
  AdamState adam;
  adam.lr = 0.1;
  AdamStep(store, adam);
  // Bias-corrected first step is lr * sign(g) up to eps.
  EXPECT_NEAR(w.data()[0], 0.9, 1e-6);
  EXPECT_NEAR(w.data()[1], 1.1, 1e-6);
  EXPECT_EQ(adam.step, 1);
}

TEST(AdamTest, MinimizesQuadratic) {
  ParameterStore store;
  Tensor w = store.Constant("w", {3}, 0.0);
  const Tensor target = Tensor::FromVector({3}, {1.0, -2.0, 0.5});
  AdamState adam;
  adam.lr = 0.05;
  for (int i = 0; i < 2000; ++i) {
    store.ZeroGrad();
    Tensor d = Sub(w, target);
    Sum(Mul(d, d)).Backward();
    AdamStep(store, adam);
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w.data()[i], target.data()[i], 1e-3);
}

TEST(AdamTest, NonFiniteGradientNamesParameterAndSkipsUpdate) {
  ParameterStore store;
  Tensor a = store.Constant("a", {1}, 1.0);
  Tensor b = store.Constant("b", {1}, 1.0);
  Sum(Add(a, b)).Backward();
  b.mutable_grad()[0] = std::numeric_limits<double>::quiet_NaN();
  AdamState adam;
  try {
    AdamStep(store, adam);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
  EXPECT_EQ(a.data()[0], 1.0);
  EXPECT_EQ(adam.step, 0);
}

}  // namespace
}  // namespace ghcbc
