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

#ifndef GHCBC_ABLATION_H_
#define GHCBC_ABLATION_H_

#include <string>

namespace ghcbc {

// Raw pose tokens fed to the policy in addition to (or instead of) the GC
// tokens.
enum class PoseInputMode { kNone, kJoint, kEe, kJointEe };
// Action space the policy regresses.
enum class PoseOutput { kJoint, kEe };
// Source of the history-slot token ("policy trainer" column of the
// ablation table).
enum class HcMode { kNone, kActionOnly, kActionImage, kStyleVariable };

struct AblationConfig {
  bool gc_enabled = true;
  PoseInputMode input_pose_mode = PoseInputMode::kNone;
  PoseOutput pose_output = PoseOutput::kEe;
  HcMode hc_mode = HcMode::kActionImage;
  // Clear history and chunk buffers on gripper transitions.
  bool clear_on_transition = true;

  // Rows 1-7 of the ablation table. Row 7 is the full method.
  static AblationConfig TableRow(int row);
};

std::string ToString(PoseInputMode mode);
std::string ToString(PoseOutput mode);
std::string ToString(HcMode mode);
// Throw ConfigError on unknown names.
PoseInputMode ParsePoseInputMode(const std::string& name);
PoseOutput ParsePoseOutput(const std::string& name);
HcMode ParseHcMode(const std::string& name);

}  // namespace ghcbc

#endif  // GHCBC_ABLATION_H_
