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

#include "ghcbc/ablation.h"

#include "ghcbc/errors.h"

namespace ghcbc {

AblationConfig AblationConfig::TableRow(int row) {
  AblationConfig c;
  switch (row) {
    case 1:
      c.gc_enabled = false;
      c.input_pose_mode = PoseInputMode::kJoint;
      c.pose_output = PoseOutput::kJoint;
      c.hc_mode = HcMode::kStyleVariable;
      break;
    case 2:
      c.gc_enabled = false;
      c.input_pose_mode = PoseInputMode::kJoint;
      c.pose_output = PoseOutput::kEe;
      c.hc_mode = HcMode::kStyleVariable;
      break;
    case 3:
      c.gc_enabled = false;
      c.input_pose_mode = PoseInputMode::kJointEe;
      c.pose_output = PoseOutput::kEe;
      c.hc_mode = HcMode::kStyleVariable;
      break;
    case 4:
      c.hc_mode = HcMode::kStyleVariable;
      break;
    case 5:
      c.hc_mode = HcMode::kNone;
      break;
    case 6:
      c.hc_mode = HcMode::kActionOnly;
      break;
    case 7:
      c.hc_mode = HcMode::kActionImage;
      break;
    default:
      throw ConfigError("ablation rows are numbered 1-7, got " +
                        std::to_string(row));
  }
  return c;
}

std::string ToString(PoseInputMode mode) {
  switch (mode) {
    case PoseInputMode::kNone: return "none";
    case PoseInputMode::kJoint: return "joint";
    case PoseInputMode::kEe: return "ee";
    case PoseInputMode::kJointEe: return "joint_ee";
  }
  return "?";
}

std::string ToString(PoseOutput mode) {
  return mode == PoseOutput::kJoint ? "joint" : "ee";
}

std::string ToString(HcMode mode) {
  switch (mode) {
    case HcMode::kNone: return "none";
    case HcMode::kActionOnly: return "action_only";
    case HcMode::kActionImage: return "action_image";
    case HcMode::kStyleVariable: return "style_variable";
  }
  return "?";
}

PoseInputMode ParsePoseInputMode(const std::string& name) {
  if (name == "none") return PoseInputMode::kNone;
  if (name == "joint") return PoseInputMode::kJoint;
  if (name == "ee") return PoseInputMode::kEe;
  if (name == "joint_ee") return PoseInputMode::kJointEe;
  throw ConfigError("unknown input_pose_mode '" + name +
                    "' (none|joint|ee|joint_ee)");
}

PoseOutput ParsePoseOutput(const std::string& name) {
  if (name == "joint") return PoseOutput::kJoint;
  if (name == "ee") return PoseOutput::kEe;
  throw ConfigError("unknown pose_output '" + name + "' (joint|ee)");
}

HcMode ParseHcMode(const std::string& name) {
  if (name == "none") return HcMode::kNone;
  if (name == "action_only") return HcMode::kActionOnly;
  if (name == "action_image") return HcMode::kActionImage;
  if (name == "style_variable") return HcMode::kStyleVariable;
  throw ConfigError("unknown hc_mode '" + name +
                    "' (none|action_only|action_image|style_variable)");
}

}  // namespace ghcbc
