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

#ifndef GHCBC_SIM_H_
#define GHCBC_SIM_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghcbc/ablation.h"
#include "ghcbc/gcbc.h"
#include "ghcbc/tensor.h"

namespace ghcbc::sim {

// Desk sorting world: a 3-link planar arm above a table, three colored
// blocks and two open boxes. Kinematic and collision-free; grasping snaps
// the nearest block within the grasp radius to the gripper.

inline constexpr int kNumJoints = 3;
inline constexpr int kPaletteSize = 7;
inline constexpr int kImageChannels = 3;

using Rgb = std::array<double, 3>;

// RGB value of palette color `color` in [0, kPaletteSize).
Rgb PaletteColor(int color);

struct ArmConfig {
  std::array<double, 3> links = {0.5, 0.4, 0.1};
  double joint_limit = 2.9;
  // Largest per-step change of any joint (radians).
  double rate_limit = 0.1;
  // Canonical start pose: end-effector at (0.5, 0) facing +x.
  std::array<double, 3> canonical = {-0.895665, 2.245928, -1.350263};
};

struct CameraConfig {
  int height = 24;
  int width = 32;
  // World units per pixel.
  double pixel_size = 0.04;
  // Samples per pixel edge for anti-aliasing.
  int supersample = 4;
  double background = 0.1;
  double box_wall = 0.04;
};

// Axis-aligned rectangle of candidate centers.
struct Region {
  double cx = 0.0;
  double cy = 0.0;
  double half_x = 0.0;
  double half_y = 0.0;
};

struct TaskSpec {
  int target_block_color = 0;
  int target_box_color = 3;
  int n_blocks = 3;
  int n_boxes = 2;
  Region block_region = {0.65, 0.15, 0.15, 0.1};
  Region box_region = {0.625, -0.25, 0.175, 0.1};
  double block_size = 0.08;
  double box_half = 0.11;
  double block_min_separation = 0.12;
  double box_min_separation = 0.26;
  double grasp_radius = 0.06;

  void Validate() const;
};

struct WorldConfig {
  TaskSpec task;
  ArmConfig arm;
  CameraConfig camera;
  int horizon = 48;
  // Expert dwell steps standing in for descend / lift.
  int settle_steps = 0;
  int lift_steps = 1;
};

struct Block {
  std::array<double, 2> position{};
  int color = 0;
  bool held = false;
};

struct Box {
  std::array<double, 2> center{};
  double half = 0.0;
  int color = 0;
};

struct WorldState {
  std::array<double, 3> joints{};
  // 1 closed, 0 open.
  int gripper = 0;
  std::vector<Block> blocks;
  std::vector<Box> boxes;
  uint64_t rng_seed = 0;
  int time = 0;
};

struct Observation {
  Tensor image;  // (1, H, W)
  JointPose joint;
  EePose ee;
};

struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
};

PlanarPose ForwardKinematics(const ArmConfig& arm,
                             const std::array<double, 3>& joints);
// Elbow branch with non-negative second joint. nullopt when the pose is out
// of reach or violates joint limits.
std::optional<std::array<double, 3>> InverseKinematics(const ArmConfig& arm,
                                                       const PlanarPose& pose);
// Like InverseKinematics, but projects unreachable wrist positions onto the
// reachable annulus and clamps joint limits. Always returns a command.
std::array<double, 3> InverseKinematicsClamped(const ArmConfig& arm,
                                               const PlanarPose& pose);

// Planar heading as a unit quaternion about z, canonicalized to w >= 0.
std::array<double, 4> HeadingQuaternion(double phi);

JointPose MakeJointPose(const WorldState& state);
EePose MakeEePose(const ArmConfig& arm, const WorldState& state);

// Blocks and boxes placed uniformly in their regions, rejection-sampled for
// separation and reachability. Throws InfeasibleError after 10^4 tries.
WorldState Reset(const WorldConfig& config, uint64_t seed);

// `command` is 3 target joint angles plus a gripper value (>= 0.5 closes).
// The gripper acts at the current pose first. Joints then move toward the
// (limit-clipped) target by at most rate_limit on the largest joint; all
// joints scale together, and held blocks follow the tip.
WorldState StepWorld(const WorldConfig& config, const WorldState& state,
                     std::span<const double> command);

Tensor RenderWrist(const WorldConfig& config, const WorldState& state);
Observation Observe(const WorldConfig& config, const WorldState& state);

// Target block released inside the target box.
bool IsSuccess(const WorldConfig& config, const WorldState& state);

// Length of the action vector in each policy action space.
int ActionDim(PoseOutput output);
// Joint command (3 + gripper) -> policy action space.
std::vector<double> ActionFromJointCommand(const ArmConfig& arm,
                                           std::span<const double> command,
                                           PoseOutput output);
// Policy action -> joint command (3 + gripper). End-effector actions
// (x, y, heading, gripper) go through clamped inverse kinematics.
std::vector<double> JointCommandFromAction(const ArmConfig& arm,
                                           std::span<const double> action,
                                           PoseOutput output);

// The observed pose (joint, ee) as a policy action.
std::vector<double> PoseAction(const JointPose& joint, const EePose& ee,
                               PoseOutput output);
// `action` relative to the pose action `current`: end-effector targets in
// the gripper frame with a heading offset, joint targets as offsets. The
// gripper channel passes through. AbsoluteAction inverts RelativeAction.
std::vector<double> RelativeAction(std::span<const double> action,
                                   std::span<const double> current,
                                   PoseOutput output);
std::vector<double> AbsoluteAction(std::span<const double> relative,
                                   std::span<const double> current,
                                   PoseOutput output);

// Waypoint demonstrator: reach above the target block, settle, close,
// hold, carry to the target box, settle, open, then hold still.
class ScriptedExpert {
 public:
  ScriptedExpert(const WorldConfig& config, const WorldState& initial);
  // Next joint command (3 + gripper).
  std::vector<double> Act(const WorldState& state);

 private:
  enum class Phase { kApproach, kSettle, kClose, kTransport, kPlace, kRelease };

  WorldConfig config_;
  std::array<double, 3> pick_{};
  std::array<double, 3> place_{};
  Phase phase_ = Phase::kApproach;
  int counter_ = 0;
};

// Closed-loop controller evaluated in the world.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void Reset(const WorldState& state, const Observation& obs) = 0;
  // Joint command (3 + gripper).
  virtual std::vector<double> Act(const WorldState& state,
                                  const Observation& obs) = 0;
  // Line-delimited trace of the last episode; empty if not recorded.
  virtual std::string Trace() const { return {}; }
};

class ExpertAgent : public Agent {
 public:
  explicit ExpertAgent(const WorldConfig& config) : config_(config) {}
  void Reset(const WorldState& state, const Observation& obs) override;
  std::vector<double> Act(const WorldState& state,
                          const Observation& obs) override;

 private:
  WorldConfig config_;
  std::unique_ptr<ScriptedExpert> expert_;
};

struct EpisodeOutcome {
  uint64_t seed = 0;
  bool success = false;
  int gripper_transitions = 0;
  std::string trace;
};

struct EvaluationResult {
  double success_rate = 0.0;
  std::vector<EpisodeOutcome> episodes;
};

using AgentFactory = std::function<std::unique_ptr<Agent>()>;

// Runs one rollout of `horizon` steps per seed. With workers > 1 episodes
// run on separate threads, each with its own agent; results are ordered by
// seed position regardless.
EvaluationResult Evaluate(const WorldConfig& config, const AgentFactory& make,
                          std::span<const uint64_t> seeds, int workers = 1);

// Seeds base, base+1, ..., base+n-1.
std::vector<uint64_t> SeedRange(uint64_t base, int n);

}  // namespace ghcbc::sim

#endif  // GHCBC_SIM_H_
