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

#include "ghcbc/gcbc.h"

#include <gtest/gtest.h>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

JointPose Joint(std::vector<double> angles, double gripper) {
  return JointPose{std::move(angles), gripper};
}

EePose Ee(double x, double y, double qz, double qw, double gripper) {
  EePose e;
  e.position = {x, y, 0.0};
  e.orientation = {0.0, 0.0, qz, qw};
  e.gripper = gripper;
  return e;
}

TEST(ReferenceTrackerTest, InitializesWithOpenGripper) {
  ReferenceTracker tracker;
  EXPECT_FALSE(tracker.initialized());
  EXPECT_THROW(tracker.MaybeUpdate(Joint({0, 0, 0}, 0), Ee(0, 0, 0, 1, 0), 1),
               StateError);
  tracker.Initialize(Joint({0.1, 0.2, 0.3}, 0), Ee(0.5, 0, 0, 1, 0));
  EXPECT_TRUE(tracker.initialized());
  EXPECT_EQ(tracker.ref_gripper_state(), 0);
}

TEST(ReferenceTrackerTest, UpdatesOnlyOnStateChange) {
  ReferenceTracker tracker;
  tracker.Initialize(Joint({0, 0, 0}, 0), Ee(0.5, 0, 0, 1, 0));
  EXPECT_FALSE(tracker.MaybeUpdate(Joint({1, 1, 1}, 0), Ee(0.6, 0, 0, 1, 0), 0));
  EXPECT_DOUBLE_EQ(tracker.ref_joint().angles[0], 0.0);
  EXPECT_TRUE(tracker.MaybeUpdate(Joint({1, 2, 3}, 0), Ee(0.7, 0.1, 0, 1, 0), 1));
  EXPECT_EQ(tracker.ref_gripper_state(), 1);
  EXPECT_DOUBLE_EQ(tracker.ref_joint().angles[2], 3.0);
  EXPECT_DOUBLE_EQ(tracker.ref_ee().position[1], 0.1);
}

TEST(DeltaTest, ZeroAtReferenceAndComponentwiseElsewhere) {
  ReferenceTracker tracker;
  const JointPose j0 = Joint({0.1, -0.2, 0.3}, 0);
  const EePose e0 = Ee(0.5, 0.1, 0.2, 0.98, 0);
  tracker.Initialize(j0, e0);
  for (double d : JointDelta(j0, tracker)) EXPECT_EQ(d, 0.0);
  for (double d : EeDelta(e0, tracker)) EXPECT_EQ(d, 0.0);
  const auto jd = JointDelta(Joint({0.2, -0.2, 0.0}, 1), tracker);
  ASSERT_EQ(jd.size(), 3u);
  EXPECT_NEAR(jd[0], 0.1, 1e-15);
  EXPECT_NEAR(jd[2], -0.3, 1e-15);
  const auto ed = EeDelta(Ee(0.6, 0.1, 0.3, 0.95, 1), tracker);
  ASSERT_EQ(ed.size(), 7u);
  EXPECT_NEAR(ed[0], 0.1, 1e-15);
  EXPECT_NEAR(ed[5], 0.1, 1e-15);
  EXPECT_NEAR(ed[6], -0.03, 1e-15);
  EXPECT_THROW(JointDelta(Joint({0.0, 0.0}, 0), tracker), DimensionError);
}

TEST(GcEncoderTest, ShapesAndInputs) {
  ParameterStore store(1);
  GcEncoder gc(store, "gc", 3, 32);
  ReferenceTracker tracker;
  tracker.Initialize(Joint({0, 0, 0}, 0), Ee(0.5, 0, 0, 1, 0));
  const JointPose j = Joint({0.1, 0.2, 0.3}, 1);
  const EePose e = Ee(0.6, 0.1, 0.0, 1.0, 1);
  EXPECT_EQ(GcEncoder::ArmInput(j, tracker).shape(), (Shape{1, 7}));
  EXPECT_EQ(GcEncoder::EeInput(e, tracker).shape(), (Shape{1, 15}));
  EXPECT_EQ(gc.Forward(j, e, tracker).f_pose.shape(), (Shape{2, 32}));
  // Arm input: delta then pose with gripper last.
  const Tensor arm = GcEncoder::ArmInput(j, tracker);
  EXPECT_DOUBLE_EQ(arm.at({0, 0}), 0.1);
  EXPECT_DOUBLE_EQ(arm.at({0, 6}), 1.0);
}

TEST(GcEncoderTest, UninitializedTrackerIsStateError) {
  ParameterStore store(1);
  GcEncoder gc(store, "gc", 3, 32);
  ReferenceTracker tracker;
  EXPECT_THROW(gc.Forward(Joint({0, 0, 0}, 0), Ee(0, 0, 0, 1, 0), tracker),
               StateError);
}

TEST(GcEncoderTest, ArmAndEndEffectorUseSeparateWeights) {
  ParameterStore store(1);
  GcEncoder gc(store, "gc", 3, 8);
  EXPECT_NO_THROW(store.Get("gc.arm.weight"));
  EXPECT_NO_THROW(store.Get("gc.ee.weight"));
  EXPECT_EQ(store.Get("gc.arm.weight").shape(), (Shape{7, 8}));
  EXPECT_EQ(store.Get("gc.ee.weight").shape(), (Shape{15, 8}));
}

}  // namespace
}  // namespace ghcbc
