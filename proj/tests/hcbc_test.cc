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

#include "ghcbc/hcbc.h"

#include <random>

#include <gtest/gtest.h>

#include "ghcbc/errors.h"
#include "support/gradcheck.h"

namespace ghcbc {
namespace {

VisionTokens Frame(double value, int n = 12, int d = 32) {
  return VisionTokens{Tensor::Full({n, d}, value)};
}

TEST(HistoryBuffersTest, PushNeedsBothHalves) {
  HistoryBuffers h(3);
  EXPECT_THROW(h.Push(std::nullopt, std::vector<double>{1, 2, 3, 4}),
               ContractError);
  EXPECT_THROW(h.Push(Frame(0.0), std::nullopt), ContractError);
  EXPECT_TRUE(h.empty());
}

TEST(HistoryBuffersTest, FifoDropsOldestAndStaysAligned) {
  HistoryBuffers h(3);
  for (int i = 0; i < 5; ++i) h.Push(Frame(i), std::vector<double>{double(i)});
  ASSERT_EQ(h.size(), 3);
  EXPECT_EQ(h.vision().size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(h.actions()[i][0], i + 2);
    EXPECT_EQ(h.vision()[i].data()[0], i + 2);
  }
  h.Clear();
  EXPECT_EQ(h.size(), 0);
  EXPECT_TRUE(h.vision().empty());
  EXPECT_THROW(HistoryBuffers(0), ConfigError);
}

TEST(HistoryBuffersTest, StoredVisionIsDetached) {
  HistoryBuffers h(2);
  Tensor p = Tensor::Parameter({1, 2}, {1.0, 2.0});
  h.Push(VisionTokens{Scale(p, 2.0)}, std::vector<double>{0.0});
  EXPECT_FALSE(h.vision().front().requires_grad());
}

HistoryEncoderConfig SmallConfig(bool vision) {
  HistoryEncoderConfig c;
  c.d_model = 16;
  c.history_k = 5;
  c.action_dim = 4;
  c.layers = 1;
  c.heads = 2;
  c.ff_hidden = 16;
  c.latent_dim = 6;
  c.use_vision = vision;
  return c;
}

TEST(HistoryEncoderTest, TokenLayoutWithAndWithoutVision) {
  ParameterStore store(1);
  HistoryEncoder with(store, "h", SmallConfig(true));
  HistoryEncoder without(store, "g", SmallConfig(false));
  HistoryBuffers h(5);
  h.Push(Frame(0.5, 12, 16), std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(with.AssembleTokens(h).shape(), (Shape{11, 16}));
  EXPECT_EQ(without.AssembleTokens(h).shape(), (Shape{6, 16}));
  EXPECT_EQ(with.AssembleTokens(HistoryBuffers(5)).shape(), (Shape{11, 16}));
}

TEST(HistoryEncoderTest, MissingEntriesArePaddedAtOldestPositions) {
  ParameterStore store(1);
  HistoryEncoder enc(store, "h", SmallConfig(true));
  HistoryBuffers empty(5);
  HistoryBuffers one(5);
  one.Push(Frame(0.5, 12, 16), std::vector<double>{1, 2, 3, 4});
  const Tensor a = enc.AssembleTokens(empty);
  const Tensor b = enc.AssembleTokens(one);
  // Rows: CLS, 5 vision, 5 action. Only the newest vision and action rows
  // differ from the all-padding layout.
  for (int64_t r = 0; r < 11; ++r) {
    bool same = true;
    for (int64_t c = 0; c < 16; ++c) same &= a.at({r, c}) == b.at({r, c});
    const bool newest = r == 5 || r == 10;
    EXPECT_EQ(same, !newest) << "row " << r;
  }
}

TEST(HistoryEncoderTest, EvalUsesMeanTrainSamples) {
  ParameterStore store(2);
  HistoryEncoder enc(store, "h", SmallConfig(true));
  HistoryBuffers h(5);
  h.Push(Frame(0.1, 12, 16), std::vector<double>{1, 0, 0, 1});
  const Tensor tokens = enc.AssembleTokens(h);
  auto [f1, l1] = enc.Encode(tokens, LatentMode::kEval, nullptr);
  auto [f2, l2] = enc.Encode(tokens, LatentMode::kEval, nullptr);
  EXPECT_EQ(l1.sample.shape(), (Shape{1, 6}));
  EXPECT_EQ(f1.xi.shape(), (Shape{1, 16}));
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(l1.sample.data()[i], l1.mu.data()[i]);
    EXPECT_EQ(f1.xi.data()[i], f2.xi.data()[i]);
  }
  std::mt19937_64 rng(0);
  auto [f3, l3] = enc.Encode(tokens, LatentMode::kTrain, &rng);
  EXPECT_NE(l3.sample.data()[0], l3.mu.data()[0]);
  EXPECT_THROW(enc.Encode(tokens, LatentMode::kTrain, nullptr), ContractError);
}

TEST(KlLossTest, ClosedFormValues) {
  EXPECT_NEAR(KlLoss(HcLatent::FromMeanSigma({0, 0, 0}, {1, 1, 1})).item(), 0.0,
              1e-12);
  EXPECT_NEAR(KlLoss(HcLatent::FromMeanSigma({1}, {1})).item(), 0.5, 1e-12);
  // sigma = 2: 0.5 * (4 - ln 4 - 1).
  EXPECT_NEAR(KlLoss(HcLatent::FromMeanSigma({0}, {2})).item(),
              0.5 * (3.0 - std::log(4.0)), 1e-12);
  EXPECT_THROW(HcLatent::FromMeanSigma({0}, {0}), ContractError);
}

TEST(KlLossTest, NonNegativeOverRandomDraws) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> mu(0.0, 2.0);
  std::uniform_real_distribution<double> sigma(0.05, 5.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> m(8), s(8);
    for (int j = 0; j < 8; ++j) {
      m[j] = mu(rng);
      s[j] = sigma(rng);
    }
    EXPECT_GE(KlLoss(HcLatent::FromMeanSigma(m, s)).item(), 0.0);
  }
}

TEST(StyleEncoderTest, EvalUsesPriorMeanAndTrainNeedsTarget) {
  ParameterStore store(3);
  StyleEncoderConfig c;
  c.d_model = 16;
  c.chunk_k = 4;
  c.action_dim = 4;
  c.pose_dim = 4;
  c.layers = 1;
  c.heads = 2;
  c.ff_hidden = 16;
  c.latent_dim = 6;
  StyleEncoder enc(store, "s", c);
  auto [f, l] = enc.Encode({0, 0, 0, 0}, nullptr, LatentMode::kEval, nullptr);
  for (double v : l.sample.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(f.xi.shape(), (Shape{1, 16}));
  std::mt19937_64 rng(1);
  EXPECT_THROW(enc.Encode({0, 0, 0, 0}, nullptr, LatentMode::kTrain, &rng),
               ContractError);
  Tensor target = Tensor::Zeros({4, 4});
  auto [ft, lt] = enc.Encode({0, 0, 0, 0}, &target, LatentMode::kTrain, &rng);
  EXPECT_EQ(lt.mu.shape(), (Shape{1, 6}));
}

}  // namespace
}  // namespace ghcbc
