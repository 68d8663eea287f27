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

#ifndef GHCBC_GCBC_H_
#define GHCBC_GCBC_H_

#include <array>
#include <string>
#include <vector>

#include "ghcbc/nn.h"

namespace ghcbc {

// Joint angles (radians) plus gripper scalar in [0,1].
struct JointPose {
  std::vector<double> angles;
  double gripper = 0.0;

  // angles followed by gripper, length n_joints + 1.
  std::vector<double> Vector() const;
};

// Position (x,y,z), unit quaternion (x,y,z,w), gripper scalar.
struct EePose {
  std::array<double, 3> position{};
  std::array<double, 4> orientation{0.0, 0.0, 0.0, 1.0};
  double gripper = 0.0;

  // Length 8: position, quaternion, gripper.
  std::vector<double> Vector() const;
};

// Reference poses captured at the last gripper transition. Starts
// uninitialized; Initialize() sets the references to the first observed
// poses with the gripper considered open.
class ReferenceTracker {
 public:
  void Initialize(const JointPose& joint, const EePose& ee);
  bool initialized() const { return initialized_; }

  // If `new_gripper_state` differs from the stored binary state, captures
  // the given poses as the new references and returns true.
  bool MaybeUpdate(const JointPose& joint, const EePose& ee,
                   int new_gripper_state);

  const JointPose& ref_joint() const { return ref_joint_; }
  const EePose& ref_ee() const { return ref_ee_; }
  int ref_gripper_state() const { return ref_gripper_state_; }

 private:
  bool initialized_ = false;
  JointPose ref_joint_;
  EePose ref_ee_;
  int ref_gripper_state_ = 0;
};

// angles(joint) - angles(reference); the gripper is not part of the delta.
std::vector<double> JointDelta(const JointPose& joint,
                               const ReferenceTracker& tracker);
// Componentwise (position, quaternion) difference, length 7.
std::vector<double> EeDelta(const EePose& ee, const ReferenceTracker& tracker);

// The two scaled GC tokens, shape (2, d_model): arm first, end-effector
// second.
struct GcFeatures {
  Tensor f_pose;
};

// Maps Concat(delta, pose) for the arm and the end-effector through two
// separate bias-free linear layers.
class GcEncoder {
 public:
  GcEncoder(ParameterStore& store, const std::string& name, int n_joints,
            int d_model);

  // Throws StateError if the tracker was never initialized.
  GcFeatures Forward(const JointPose& joint, const EePose& ee,
                     const ReferenceTracker& tracker) const;

  // The unscaled f_arm and f_ee rows.
  static Tensor ArmInput(const JointPose& joint,
                         const ReferenceTracker& tracker);
  static Tensor EeInput(const EePose& ee, const ReferenceTracker& tracker);

 private:
  int n_joints_;
  nn::Linear arm_;
  nn::Linear ee_;
};

}  // namespace ghcbc

#endif  // GHCBC_GCBC_H_
