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

#include "ghcbc/runtime.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ghcbc/errors.h"
#include "ghcbc/tensor.h"
#include "support/harness.h"

namespace ghcbc {
namespace {

using Chunk = std::vector<std::vector<double>>;

TEST(EnsembleTest, SinglePredictionPassesThrough) {
  const std::vector<std::vector<double>> p = {{0.3, -2.0, 0.7}};
  EXPECT_EQ(Ensemble(p, {}), p[0]);
}

TEST(EnsembleTest, HandEvaluatedWeights) {
  const std::vector<std::vector<double>> p = {{1.0}, {3.0}};
  EnsembleConfig c;
  c.m = std::log(2.0);
  EXPECT_NEAR(Ensemble(p, c)[0], 5.0 / 3.0, 1e-12);
  c.newest_first = true;
  EXPECT_NEAR(Ensemble(p, c)[0], 7.0 / 3.0, 1e-12);
}

TEST(EnsembleTest, ZeroDecayIsArithmeticMean) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    const int count = 1 + trial % 20;
    std::vector<std::vector<double>> p(count, std::vector<double>(4));
    std::vector<double> mean(4, 0.0);
    for (auto& row : p) {
      for (int c = 0; c < 4; ++c) {
        row[c] = n(rng);
        mean[c] += row[c] / count;
      }
    }
    const auto out = Ensemble(p, EnsembleConfig{0.0, false});
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(out[c], mean[c], 1e-12);
  }
}

TEST(EnsembleTest, OutputIsConvexCombination) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> m(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int count = 1 + trial % 20;
    std::vector<std::vector<double>> p(count, std::vector<double>(3));
    for (auto& row : p) {
      for (double& v : row) v = n(rng);
    }
    const auto out = Ensemble(p, EnsembleConfig{m(rng), trial % 2 == 1});
    for (int c = 0; c < 3; ++c) {
      double lo = p[0][c], hi = p[0][c];
      for (const auto& row : p) {
        lo = std::min(lo, row[c]);
        hi = std::max(hi, row[c]);
      }
      EXPECT_GE(out[c], lo - 1e-12);
      EXPECT_LE(out[c], hi + 1e-12);
    }
  }
}

TEST(EnsembleTest, OlderPredictionsWeighMoreForPositiveDecay) {
  // A unit impulse at position j recovers the normalized weight of j.
  const int n = 6;
  EnsembleConfig c;
  c.m = 0.3;
  double previous = 2.0;
  for (int j = 0; j < n; ++j) {
    std::vector<std::vector<double>> p(n, std::vector<double>{0.0});
    p[j][0] = 1.0;
    const double w = Ensemble(p, c)[0];
    EXPECT_LT(w, previous);
    previous = w;
  }
}

TEST(EnsembleTest, AppendThenRemoveIsInvariant) {
  const std::vector<std::vector<double>> p = {{1.0, 2.0}, {0.5, -1.0}};
  auto q = p;
  q.push_back({9.0, 9.0});
  q.pop_back();
  EXPECT_EQ(Ensemble(p, {}), Ensemble(q, {}));
}

TEST(EnsembleTest, RejectsEmptyAndNegativeDecay) {
  const std::vector<std::vector<double>> none;
  EXPECT_THROW(Ensemble(none, {}), NoPredictionError);
  const std::vector<std::vector<double>> p = {{1.0}};
  EXPECT_THROW(Ensemble(p, EnsembleConfig{-0.1, false}), ConfigError);
}

TEST(GripperHysteresisTest, Thresholds) {
  const GripperState open{0, 0.0};
  const GripperState closed{1, 1.0};
  EXPECT_EQ(GripperHysteresis(0.6, open, 0.6, 0.4).value, 1);
  EXPECT_EQ(GripperHysteresis(0.59, open, 0.6, 0.4).value, 0);
  EXPECT_EQ(GripperHysteresis(0.5, closed, 0.6, 0.4).value, 1);
  EXPECT_EQ(GripperHysteresis(0.5, open, 0.6, 0.4).value, 0);
  EXPECT_EQ(GripperHysteresis(0.4, closed, 0.6, 0.4).value, 0);
  EXPECT_EQ(GripperHysteresis(0.41, closed, 0.6, 0.4).value, 1);
  EXPECT_DOUBLE_EQ(GripperHysteresis(0.41, closed, 0.6, 0.4).raw, 0.41);
}

TEST(ChunkBufferTest, WritesOverlapAndDropPastHorizon) {
  ChunkBuffer buffer(5, 3);
  buffer.Write(0, {{0.0}, {1.0}, {2.0}});
  buffer.Write(1, {{10.0}, {11.0}, {12.0}});
  buffer.Write(3, {{30.0}, {31.0}, {32.0}});
  EXPECT_EQ(buffer.Slot(0).size(), 1u);
  EXPECT_EQ(buffer.Slot(1).size(), 2u);
  EXPECT_EQ(buffer.Slot(2).size(), 2u);
  EXPECT_EQ(buffer.Slot(2)[0][0], 2.0);
  EXPECT_EQ(buffer.Slot(2)[1][0], 11.0);
  EXPECT_EQ(buffer.Slot(4).size(), 1u);
  EXPECT_EQ(buffer.PendingFrom(3), 3u);
  EXPECT_THROW(buffer.Slot(5), DimensionError);
  EXPECT_THROW(buffer.Write(0, {{1.0}}), DimensionError);
  buffer.Clear();
  EXPECT_EQ(buffer.PendingFrom(0), 0u);
}

using testing::RandomPredictor;

JointPose RandomJoint(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {{u(rng), u(rng), u(rng)}, 0.0};
}

EePose RandomEe(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EePose ee;
  ee.position = {u(rng), u(rng), 0.0};
  return ee;
}

TEST(PolicyRuntimeTest, RequiresResetAndStopsAtHorizon) {
  RandomPredictor predictor(4, 0);
  RuntimeConfig cfg;
  cfg.horizon = 3;
  cfg.chunk_k = 4;
  PolicyRuntime runtime(predictor, cfg);
  const Tensor image = Tensor::Zeros({1, 2, 2});
  std::mt19937_64 rng(0);
  EXPECT_THROW(runtime.Step(image, RandomJoint(rng), RandomEe(rng)),
               StateError);
  runtime.Reset(RandomJoint(rng), RandomEe(rng));
  for (int t = 0; t < 3; ++t) runtime.Step(image, RandomJoint(rng), RandomEe(rng));
  EXPECT_THROW(runtime.Step(image, RandomJoint(rng), RandomEe(rng)),
               EpisodeEndError);
}

TEST(PolicyRuntimeTest, FirstStepUsesSolePrediction) {
  RandomPredictor predictor(5, 3);
  RuntimeConfig cfg;
  cfg.chunk_k = 5;
  PolicyRuntime runtime(predictor, cfg);
  std::mt19937_64 rng(1);
  runtime.Reset(RandomJoint(rng), RandomEe(rng));
  const StepRecord r =
      runtime.Step(Tensor::Zeros({1, 2, 2}), RandomJoint(rng), RandomEe(rng));
  EXPECT_EQ(r.slot_predictions, 1u);
}

TEST(PolicyRuntimeTest, RandomizedTracesSatisfyInvariants) {
  const testing::StateMachineReport report =
      testing::RunRandomStateMachine(10000, 42);
  EXPECT_GE(report.steps, 10000);
  EXPECT_GT(report.transitions, 100);
  EXPECT_TRUE(report.violations.empty()) << report.violations.front();
}

TEST(PolicyRuntimeTest, CheckTraceFlagsTampering) {
  RandomPredictor predictor(6, 9);
  RuntimeConfig cfg;
  cfg.horizon = 40;
  cfg.chunk_k = 6;
  PolicyRuntime runtime(predictor, cfg);
  std::mt19937_64 rng(5);
  runtime.Reset(RandomJoint(rng), RandomEe(rng));
  std::vector<StepRecord> records;
  for (int t = 0; t < cfg.horizon; ++t) {
    records.push_back(runtime.Step(Tensor::Zeros({1, 2, 2}), RandomJoint(rng),
                                   RandomEe(rng)));
  }
  ASSERT_TRUE(CheckTrace(records, cfg).empty());

  auto bad_gripper = records;
  bad_gripper[10].executed_action.back() = 0.5;
  EXPECT_FALSE(CheckTrace(bad_gripper, cfg).empty());
  auto bad_time = records;
  bad_time[3].t = 7;
  EXPECT_FALSE(CheckTrace(bad_time, cfg).empty());
  auto bad_history = records;
  bad_history[5].history_length += 1;
  EXPECT_FALSE(CheckTrace(bad_history, cfg).empty());
  auto bad_arm = records;
  bad_arm[2].executed_action[0] += 1.0;
  EXPECT_FALSE(CheckTrace(bad_arm, cfg).empty());
}

ModelConfig TinyModel(int chunk_k) {
  ModelConfig c = ModelConfig::Desk();
  c.policy.enc_layers = 1;
  c.policy.dec_layers = 1;
  c.policy.hcbc_layers = 1;
  c.policy.chunk_k = chunk_k;
  c.policy.history_k = 4;
  return c;
}

TEST(PolicyRuntimeTest, DegenerateSettingsMatchDirectPolicyLoop) {
  const ModelConfig mc = TinyModel(1);
  GhcbcModel model(mc, 7);
  sim::WorldConfig world;
  world.horizon = 30;
  const auto seeds = sim::SeedRange(0, 3);
  const auto mismatches =
      testing::CompareRuntimeWithDirectLoop(model, world, seeds);
  EXPECT_TRUE(mismatches.empty()) << mismatches.front();
}

TEST(PolicyAgentTest, TraceParsesAndPassesChecks) {
  const ModelConfig mc = TinyModel(20);
  GhcbcModel model(mc, 3);
  sim::WorldConfig world;
  world.horizon = 12;
  const auto seeds = sim::SeedRange(5, 2);
  const auto result = sim::Evaluate(
      world,
      [&] { return std::make_unique<PolicyAgent>(model, world, EnsembleConfig{}); },
      seeds);
  const RuntimeConfig cfg = RuntimeConfigFor(mc, world, EnsembleConfig{});
  for (const auto& e : result.episodes) {
    const auto records = ParseTrace(e.trace);
    ASSERT_EQ(static_cast<int>(records.size()), world.horizon);
    EXPECT_TRUE(CheckTrace(records, cfg).empty());
  }
}

}  // namespace
}  // namespace ghcbc
