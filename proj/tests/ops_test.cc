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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ghcbc/errors.h"
#include "support/gradcheck.h"

namespace ghcbc {
namespace {

void ExpectValues(const Tensor& t, std::vector<double> want, double tol = 1e-12) {
  ASSERT_EQ(t.numel(), static_cast<int64_t>(want.size()));
  for (size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(t.data()[i], want[i], tol) << i;
}

TEST(OpsTest, MatMulValues) {
  Tensor a = Tensor::FromVector({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::FromVector({3, 2}, {7, 8, 9, 10, 11, 12});
  ExpectValues(MatMul(a, b), {58, 64, 139, 154});
  EXPECT_THROW(MatMul(a, a), DimensionError);
}

TEST(OpsTest, SuffixBroadcast) {
  Tensor a = Tensor::FromVector({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::FromVector({2}, {10, 20});
  ExpectValues(Add(a, b), {11, 22, 13, 24});
  ExpectValues(Mul(a, b), {10, 40, 30, 80});
  EXPECT_THROW(Add(a, Tensor::Zeros({3})), DimensionError);
}

TEST(OpsTest, SoftmaxRowsSumToOne) {
  Tensor s = Softmax(Tensor::FromVector({2, 3}, {1, 2, 3, 1000, 1000, 1000}));
  ExpectValues(SumAxis(s, 1), {1.0, 1.0});
  EXPECT_NEAR(s.at({1, 0}), 1.0 / 3.0, 1e-12);
}

TEST(OpsTest, LayerNormZeroMeanUnitVariance) {
  Tensor y = LayerNorm(Tensor::FromVector({1, 4}, {1, 2, 3, 4}), 0.0);
  double mean = 0.0, var = 0.0;
  for (double v : y.data()) mean += v / 4;
  for (double v : y.data()) var += (v - mean) * (v - mean) / 4;
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-12);
}

TEST(OpsTest, GeluMatchesErfForm) {
  Tensor y = Gelu(Tensor::FromVector({3}, {-1.0, 0.0, 2.0}));
  auto ref = [](double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); };
  ExpectValues(y, {ref(-1.0), 0.0, ref(2.0)});
}

TEST(OpsTest, ConcatSliceSplitRoundTrip) {
  Tensor a = Tensor::FromVector({2, 3}, {1, 2, 3, 4, 5, 6});
  auto parts = Split(a, 1, {1, 2});
  ExpectValues(parts[0], {1, 4});
  ExpectValues(Concat(parts, 1), {1, 2, 3, 4, 5, 6});
  ExpectValues(Slice(a, 0, 1, 1), {4, 5, 6});
  EXPECT_THROW(Slice(a, 0, 1, 2), DimensionError);
  EXPECT_THROW(Split(a, 1, {1, 1}), DimensionError);
}

TEST(OpsTest, Im2ColLayout) {
  // 1x3x3 image, 3x3 kernel, stride 1, no padding: one row of 9 values.
  Tensor img = Tensor::FromVector({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  ExpectValues(Im2Col(img, 3, 1, 0), {1, 2, 3, 4, 5, 6, 7, 8, 9});
  EXPECT_EQ(ConvOutputExtent(24, 3, 2, 1), 12);
  EXPECT_EQ(Im2Col(img, 3, 2, 1).shape(), (Shape{4, 9}));
}

TEST(OpsTest, AttentionUniformKeysAverageValues) {
  Tensor q = Tensor::FromVector({1, 2}, {0.3, -0.2});
  Tensor k = Tensor::Zeros({3, 2});
  Tensor v = Tensor::FromVector({3, 2}, {1, 2, 3, 4, 5, 6});
  ExpectValues(Attention(q, k, v, 2), {3, 4});
  EXPECT_THROW(Attention(q, k, v, 3), DimensionError);
}

TEST(OpsTest, LogRejectsNothingButIsFiniteOnPositiveDomain) {
  Tensor y = Log(Tensor::FromVector({2}, {1.0, std::exp(2.0)}));
  ExpectValues(y, {0.0, 2.0});
}

// Each op against central differences over random shapes and values.
class OpGradientTest : public ::testing::TestWithParam<size_t> {};

TEST_P(OpGradientTest, MatchesFiniteDifferences) {
  const auto ops = testing::OpCatalog();
  const auto& op = ops[GetParam()];
  std::mt19937_64 rng(1234 + GetParam());
  for (int i = 0; i < 25; ++i) {
    EXPECT_LT(op.run(rng), 1e-5) << op.name << " case " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllOps, OpGradientTest,
    ::testing::Range<size_t>(0, testing::OpCatalog().size()),
    [](const ::testing::TestParamInfo<size_t>& info) {
      return testing::OpCatalog()[info.param].name;
    });

}  // namespace
}  // namespace ghcbc
