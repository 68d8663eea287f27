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

#include "ghcbc/errors.h"

namespace ghcbc {

std::vector<double> JointPose::Vector() const {
  std::vector<double> v = angles;
  v.push_back(gripper);
  return v;
}

std::vector<double> EePose::Vector() const {
  return {position[0],    position[1],    position[2],    orientation[0],
          orientation[1], orientation[2], orientation[3], gripper};
}

void ReferenceTracker::Initialize(const JointPose& joint, const EePose& ee) {
  ref_joint_ = joint;
  ref_ee_ = ee;
  ref_gripper_state_ = 0;
  initialized_ = true;
}

bool ReferenceTracker::MaybeUpdate(const JointPose& joint, const EePose& ee,
                                   int new_gripper_state) {
  if (!initialized_) throw StateError("reference tracker not initialized");
  if (new_gripper_state == ref_gripper_state_) return false;
  ref_joint_ = joint;
  ref_ee_ = ee;
  ref_gripper_state_ = new_gripper_state;
  return true;
}

std::vector<double> JointDelta(const JointPose& joint,
                               const ReferenceTracker& tracker) {
  const auto& ref = tracker.ref_joint().angles;
  if (ref.size() != joint.angles.size()) {
    throw DimensionError("joint pose has " +
                         std::to_string(joint.angles.size()) +
                         " angles, reference has " + std::to_string(ref.size()));
  }
  std::vector<double> delta(joint.angles.size());
  for (size_t i = 0; i < delta.size(); ++i) delta[i] = joint.angles[i] - ref[i];
  return delta;
}

std::vector<double> EeDelta(const EePose& ee, const ReferenceTracker& tracker) {
  const EePose& ref = tracker.ref_ee();
  std::vector<double> delta(7);
  for (int i = 0; i < 3; ++i) delta[i] = ee.position[i] - ref.position[i];
  for (int i = 0; i < 4; ++i) {
    delta[3 + i] = ee.orientation[i] - ref.orientation[i];
  }
  return delta;
}

GcEncoder::GcEncoder(ParameterStore& store, const std::string& name,
                     int n_joints, int d_model)
    : n_joints_(n_joints),
      arm_(store, name + ".arm", 2 * n_joints + 1, d_model, /*bias=*/false),
      ee_(store, name + ".ee", 15, d_model, /*bias=*/false) {}

Tensor GcEncoder::ArmInput(const JointPose& joint,
                           const ReferenceTracker& tracker) {
  std::vector<double> delta = JointDelta(joint, tracker);
  std::vector<double> pose = joint.Vector();
  const int64_t nd = static_cast<int64_t>(delta.size());
  const int64_t np = static_cast<int64_t>(pose.size());
  return Concat({Tensor::FromVector({1, nd}, std::move(delta)),
                 Tensor::FromVector({1, np}, std::move(pose))},
                1);
}

Tensor GcEncoder::EeInput(const EePose& ee, const ReferenceTracker& tracker) {
  return Concat({Tensor::FromVector({1, 7}, EeDelta(ee, tracker)),
                 Tensor::FromVector({1, 8}, ee.Vector())},
                1);
}

GcFeatures GcEncoder::Forward(const JointPose& joint, const EePose& ee,
                              const ReferenceTracker& tracker) const {
  if (!tracker.initialized()) {
    throw StateError("GC features need an initialized reference tracker");
  }
  if (static_cast<int>(joint.angles.size()) != n_joints_) {
    throw DimensionError("expected " + std::to_string(n_joints_) +
                         " joint angles, got " +
                         std::to_string(joint.angles.size()));
  }
  Tensor arm = arm_(ArmInput(joint, tracker));
  Tensor eef = ee_(EeInput(ee, tracker));
  return {Concat({arm, eef}, 0)};
}

}  // namespace ghcbc
