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

#include "ghcbc/sim.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "ghcbc/errors.h"

namespace ghcbc::sim {
namespace {

// Portable uniform draw in [0, 1) from the raw 64-bit engine output.
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double UniformIn(std::mt19937_64& rng, double center, double half) {
  return center + (2.0 * Uniform01(rng) - 1.0) * half;
}

double WrapAngle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

double Distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

bool Reachable(const ArmConfig& arm, const std::array<double, 2>& p) {
  return InverseKinematics(arm, {p[0], p[1], 0.0}).has_value();
}

// Rejection-samples `n` points in `region` with pairwise distance >= sep.
std::vector<std::array<double, 2>> SamplePoints(std::mt19937_64& rng,
                                                const ArmConfig& arm,
                                                const Region& region, int n,
                                                double sep,
                                                const char* what) {
  constexpr int kMaxTries = 10000;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    std::vector<std::array<double, 2>> points;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const std::array<double, 2> p = {UniformIn(rng, region.cx, region.half_x),
                                       UniformIn(rng, region.cy, region.half_y)};
      if (!Reachable(arm, p)) ok = false;
      for (const auto& q : points) {
        if (Distance(p, q) < sep) ok = false;
      }
      points.push_back(p);
    }
    if (ok) return points;
  }
  throw InfeasibleError(std::string("could not place ") + what + " after " +
                        std::to_string(kMaxTries) + " tries");
}

// Palette ids other than the two target colors, in shuffled order.
std::vector<int> DistractorColors(std::mt19937_64& rng, const TaskSpec& task) {
  std::vector<int> colors;
  for (int c = 0; c < kPaletteSize; ++c) {
    if (c != task.target_block_color && c != task.target_box_color) {
      colors.push_back(c);
    }
  }
  for (size_t i = colors.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(colors[i - 1], colors[j]);
  }
  return colors;
}

bool Near(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  for (int i = 0; i < kNumJoints; ++i) {
    if (std::abs(a[i] - b[i]) > 1e-9) return false;
  }
  return true;
}

std::vector<double> Command(const std::array<double, 3>& joints,
                            double gripper) {
  return {joints[0], joints[1], joints[2], gripper};
}

}  // namespace

Rgb PaletteColor(int color) {
  static constexpr std::array<Rgb, kPaletteSize> kPalette = {{
      {0.9, 0.2, 0.2},
      {0.2, 0.8, 0.2},
      {0.2, 0.3, 0.9},
      {0.9, 0.8, 0.2},
      {0.8, 0.2, 0.8},
      {0.2, 0.8, 0.8},
      {0.9, 0.9, 0.9},
  }};
  if (color < 0 || color >= kPaletteSize) {
    throw ConfigError("palette color " + std::to_string(color) +
                      " outside [0, " + std::to_string(kPaletteSize) + ")");
  }
  return kPalette[color];
}

void TaskSpec::Validate() const {
  auto check_color = [](int c, const char* what) {
    if (c < 0 || c >= kPaletteSize) {
      throw ConfigError(std::string(what) + " color " + std::to_string(c) +
                        " outside the palette");
    }
  };
  check_color(target_block_color, "target block");
  check_color(target_box_color, "target box");
  if (target_block_color == target_box_color) {
    throw ConfigError("target block and box colors must differ");
  }
  if (n_blocks < 1 || n_boxes < 1) {
    throw ConfigError("need at least one block and one box");
  }
  if (n_blocks - 1 > kPaletteSize - 2) {
    throw ConfigError("not enough palette colors for distractor blocks");
  }
  if (block_min_separation <= 0.0 || box_min_separation <= 0.0) {
    throw ConfigError("minimum separation must be positive");
  }
  if (block_size <= 0.0 || box_half <= 0.0 || grasp_radius <= 0.0) {
    throw ConfigError("object sizes and grasp radius must be positive");
  }
}

PlanarPose ForwardKinematics(const ArmConfig& arm,
                             const std::array<double, 3>& joints) {
  PlanarPose pose;
  double heading = 0.0;
  for (int i = 0; i < kNumJoints; ++i) {
    heading += joints[i];
    pose.x += arm.links[i] * std::cos(heading);
    pose.y += arm.links[i] * std::sin(heading);
  }
  pose.phi = WrapAngle(heading);
  return pose;
}

std::optional<std::array<double, 3>> InverseKinematics(const ArmConfig& arm,
                                                       const PlanarPose& pose) {
  const double l1 = arm.links[0];
  const double l2 = arm.links[1];
  const double wx = pose.x - arm.links[2] * std::cos(pose.phi);
  const double wy = pose.y - arm.links[2] * std::sin(pose.phi);
  const double c2 = (wx * wx + wy * wy - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c2 < -1.0 || c2 > 1.0) return std::nullopt;
  const double t2 = std::acos(c2);
  const double t1 = std::atan2(wy, wx) -
                    std::atan2(l2 * std::sin(t2), l1 + l2 * std::cos(t2));
  const std::array<double, 3> joints = {WrapAngle(t1), t2,
                                        WrapAngle(pose.phi - t1 - t2)};
  for (double q : joints) {
    if (std::abs(q) > arm.joint_limit) return std::nullopt;
  }
  return joints;
}

std::array<double, 3> InverseKinematicsClamped(const ArmConfig& arm,
                                               const PlanarPose& pose) {
  const double l1 = arm.links[0];
  const double l2 = arm.links[1];
  double wx = pose.x - arm.links[2] * std::cos(pose.phi);
  double wy = pose.y - arm.links[2] * std::sin(pose.phi);
  const double r = std::hypot(wx, wy);
  const double r_min = std::abs(l1 - l2) + 1e-9;
  const double r_max = l1 + l2 - 1e-9;
  if (r < r_min || r > r_max) {
    const double target = std::clamp(r, r_min, r_max);
    if (r > 0.0) {
      wx *= target / r;
      wy *= target / r;
    } else {
      wx = target;
      wy = 0.0;
    }
  }
  const double c2 = std::clamp(
      (wx * wx + wy * wy - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double t2 = std::acos(c2);
  const double t1 = std::atan2(wy, wx) -
                    std::atan2(l2 * std::sin(t2), l1 + l2 * std::cos(t2));
  std::array<double, 3> joints = {WrapAngle(t1), t2,
                                  WrapAngle(pose.phi - t1 - t2)};
  for (double& q : joints) q = std::clamp(q, -arm.joint_limit, arm.joint_limit);
  return joints;
}

std::array<double, 4> HeadingQuaternion(double phi) {
  double s = std::sin(0.5 * phi);
  double c = std::cos(0.5 * phi);
  if (c < 0.0) {
    s = -s;
    c = -c;
  }
  return {0.0, 0.0, s, c};
}

JointPose MakeJointPose(const WorldState& state) {
  JointPose pose;
  pose.angles.assign(state.joints.begin(), state.joints.end());
  pose.gripper = static_cast<double>(state.gripper);
  return pose;
}

EePose MakeEePose(const ArmConfig& arm, const WorldState& state) {
  const PlanarPose planar = ForwardKinematics(arm, state.joints);
  EePose pose;
  pose.position = {planar.x, planar.y, 0.0};
  pose.orientation = HeadingQuaternion(planar.phi);
  pose.gripper = static_cast<double>(state.gripper);
  return pose;
}

WorldState Reset(const WorldConfig& config, uint64_t seed) {
  const TaskSpec& task = config.task;
  task.Validate();
  std::mt19937_64 rng(seed);
  WorldState state;
  state.rng_seed = seed;
  state.joints = config.arm.canonical;

  const auto block_pos =
      SamplePoints(rng, config.arm, task.block_region, task.n_blocks,
                   task.block_min_separation, "blocks");
  const auto box_pos =
      SamplePoints(rng, config.arm, task.box_region, task.n_boxes,
                   task.box_min_separation, "boxes");
  const std::vector<int> distractors = DistractorColors(rng, task);
  for (int i = 0; i < task.n_blocks; ++i) {
    Block block;
    block.position = block_pos[i];
    block.color = i == 0 ? task.target_block_color : distractors[i - 1];
    state.blocks.push_back(block);
  }
  for (int i = 0; i < task.n_boxes; ++i) {
    Box box;
    box.center = box_pos[i];
    box.half = task.box_half;
    box.color = i == 0 ? task.target_box_color
                       : distractors[(i - 1) % distractors.size()];
    state.boxes.push_back(box);
  }
  return state;
}

WorldState StepWorld(const WorldConfig& config, const WorldState& state,
                     std::span<const double> command) {
  if (command.size() != kNumJoints + 1) {
    throw DimensionError("joint command needs " +
                         std::to_string(kNumJoints + 1) + " values, got " +
                         std::to_string(command.size()));
  }
  const ArmConfig& arm = config.arm;
  WorldState next = state;
  next.time = state.time + 1;

  // The gripper acts at the pose where the command is issued.
  const PlanarPose here = ForwardKinematics(arm, state.joints);
  const double g = command[kNumJoints];
  const int want = std::isfinite(g) && g >= 0.5 ? 1 : 0;
  if (want == 1 && state.gripper == 0) {
    Block* nearest = nullptr;
    double best = config.task.grasp_radius;
    for (Block& block : next.blocks) {
      const double d = Distance(block.position, {here.x, here.y});
      if (d <= best) {
        best = d;
        nearest = &block;
      }
    }
    if (nearest != nullptr) nearest->held = true;
  } else if (want == 0) {
    for (Block& block : next.blocks) block.held = false;
  }

  std::array<double, 3> delta{};
  double largest = 0.0;
  for (int i = 0; i < kNumJoints; ++i) {
    const double target = std::isfinite(command[i])
                              ? std::clamp(command[i], -arm.joint_limit,
                                           arm.joint_limit)
                              : state.joints[i];
    delta[i] = target - state.joints[i];
    largest = std::max(largest, std::abs(delta[i]));
  }
  const double scale = largest > arm.rate_limit ? arm.rate_limit / largest : 1.0;
  for (int i = 0; i < kNumJoints; ++i) {
    next.joints[i] = state.joints[i] + scale * delta[i];
  }

  const PlanarPose ee = ForwardKinematics(arm, next.joints);
  for (Block& block : next.blocks) {
    if (block.held) block.position = {ee.x, ee.y};
  }
  next.gripper = want;
  return next;
}

Tensor RenderWrist(const WorldConfig& config, const WorldState& state) {
  const CameraConfig& cam = config.camera;
  const PlanarPose ee = ForwardKinematics(config.arm, state.joints);
  const double c = std::cos(ee.phi);
  const double s = std::sin(ee.phi);
  const int ss = std::max(1, cam.supersample);
  const double inv = 1.0 / (ss * ss);
  const double half_block = 0.5 * config.task.block_size;

  // Held blocks are drawn last so they stay on top.
  std::vector<const Block*> order;
  for (const Block& b : state.blocks) {
    if (!b.held) order.push_back(&b);
  }
  for (const Block& b : state.blocks) {
    if (b.held) order.push_back(&b);
  }

  const size_t plane = static_cast<size_t>(cam.height) * cam.width;
  std::vector<double> pixels(kImageChannels * plane);
  const Rgb background = {cam.background, cam.background, cam.background};
  for (int r = 0; r < cam.height; ++r) {
    for (int col = 0; col < cam.width; ++col) {
      Rgb acc = {0.0, 0.0, 0.0};
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double u =
              (col + (sx + 0.5) / ss - 0.5 * cam.width) * cam.pixel_size;
          const double v =
              (0.5 * cam.height - r - (sy + 0.5) / ss) * cam.pixel_size;
          const double wx = ee.x + c * u - s * v;
          const double wy = ee.y + s * u + c * v;
          Rgb value = background;
          for (const Box& box : state.boxes) {
            const double dx = std::abs(wx - box.center[0]);
            const double dy = std::abs(wy - box.center[1]);
            const bool outer = dx <= box.half && dy <= box.half;
            const bool inner =
                dx < box.half - cam.box_wall && dy < box.half - cam.box_wall;
            if (outer && !inner) value = PaletteColor(box.color);
          }
          for (const Block* block : order) {
            if (std::abs(wx - block->position[0]) <= half_block &&
                std::abs(wy - block->position[1]) <= half_block) {
              value = PaletteColor(block->color);
            }
          }
          for (int ch = 0; ch < kImageChannels; ++ch) acc[ch] += value[ch];
        }
      }
      for (int ch = 0; ch < kImageChannels; ++ch) {
        pixels[ch * plane + static_cast<size_t>(r) * cam.width + col] =
            acc[ch] * inv;
      }
    }
  }
  return Tensor::FromVector({kImageChannels, cam.height, cam.width},
                            std::move(pixels));
}

Observation Observe(const WorldConfig& config, const WorldState& state) {
  return {RenderWrist(config, state), MakeJointPose(state),
          MakeEePose(config.arm, state)};
}

bool IsSuccess(const WorldConfig& config, const WorldState& state) {
  const Box* target_box = nullptr;
  for (const Box& box : state.boxes) {
    if (box.color == config.task.target_box_color) target_box = &box;
  }
  if (target_box == nullptr) return false;
  for (const Block& block : state.blocks) {
    if (block.color != config.task.target_block_color) continue;
    if (block.held) return false;
    return std::abs(block.position[0] - target_box->center[0]) <
               target_box->half &&
           std::abs(block.position[1] - target_box->center[1]) <
               target_box->half;
  }
  return false;
}

int ActionDim(PoseOutput /*output*/) { return kNumJoints + 1; }

std::vector<double> ActionFromJointCommand(const ArmConfig& arm,
                                           std::span<const double> command,
                                           PoseOutput output) {
  if (command.size() != kNumJoints + 1) {
    throw DimensionError("joint command needs " +
                         std::to_string(kNumJoints + 1) + " values");
  }
  if (output == PoseOutput::kJoint) {
    return {command.begin(), command.end()};
  }
  const PlanarPose p =
      ForwardKinematics(arm, {command[0], command[1], command[2]});
  return {p.x, p.y, p.phi, command[kNumJoints]};
}

std::vector<double> JointCommandFromAction(const ArmConfig& arm,
                                           std::span<const double> action,
                                           PoseOutput output) {
  if (static_cast<int>(action.size()) != ActionDim(output)) {
    throw DimensionError("action needs " + std::to_string(ActionDim(output)) +
                         " values, got " + std::to_string(action.size()));
  }
  if (output == PoseOutput::kJoint) {
    return {action.begin(), action.end()};
  }
  const auto joints =
      InverseKinematicsClamped(arm, {action[0], action[1], action[2]});
  return Command(joints, action[3]);
}

std::vector<double> PoseAction(const JointPose& joint, const EePose& ee,
                               PoseOutput output) {
  if (output == PoseOutput::kJoint) {
    if (joint.angles.size() != kNumJoints) {
      throw DimensionError("joint pose needs " + std::to_string(kNumJoints) +
                           " angles, got " +
                           std::to_string(joint.angles.size()));
    }
    return Command({joint.angles[0], joint.angles[1], joint.angles[2]},
                   joint.gripper);
  }
  const double phi = 2.0 * std::atan2(ee.orientation[2], ee.orientation[3]);
  return {ee.position[0], ee.position[1], WrapAngle(phi), ee.gripper};
}

namespace {

void CheckActionPair(std::span<const double> a, std::span<const double> b,
                     PoseOutput output) {
  const size_t n = static_cast<size_t>(ActionDim(output));
  if (a.size() != n || b.size() != n) {
    throw DimensionError("relative action conversion needs two actions of "
                         "width " + std::to_string(n));
  }
}

}  // namespace

std::vector<double> RelativeAction(std::span<const double> action,
                                   std::span<const double> current,
                                   PoseOutput output) {
  CheckActionPair(action, current, output);
  std::vector<double> out(action.begin(), action.end());
  if (output == PoseOutput::kJoint) {
    for (int i = 0; i < kNumJoints; ++i) out[i] -= current[i];
    return out;
  }
  const double c = std::cos(current[2]);
  const double s = std::sin(current[2]);
  const double dx = action[0] - current[0];
  const double dy = action[1] - current[1];
  out[0] = c * dx + s * dy;
  out[1] = -s * dx + c * dy;
  out[2] = WrapAngle(action[2] - current[2]);
  return out;
}

std::vector<double> AbsoluteAction(std::span<const double> relative,
                                   std::span<const double> current,
                                   PoseOutput output) {
  CheckActionPair(relative, current, output);
  std::vector<double> out(relative.begin(), relative.end());
  if (output == PoseOutput::kJoint) {
    for (int i = 0; i < kNumJoints; ++i) out[i] += current[i];
    return out;
  }
  const double c = std::cos(current[2]);
  const double s = std::sin(current[2]);
  out[0] = current[0] + c * relative[0] - s * relative[1];
  out[1] = current[1] + s * relative[0] + c * relative[1];
  out[2] = WrapAngle(current[2] + relative[2]);
  return out;
}

ScriptedExpert::ScriptedExpert(const WorldConfig& config,
                               const WorldState& initial)
    : config_(config) {
  const Block* block = nullptr;
  for (const Block& b : initial.blocks) {
    if (b.color == config.task.target_block_color) block = &b;
  }
  const Box* box = nullptr;
  for (const Box& b : initial.boxes) {
    if (b.color == config.task.target_box_color) box = &b;
  }
  if (block == nullptr || box == nullptr) {
    throw InfeasibleError("scene lacks the target block or box");
  }
  const auto pick =
      InverseKinematics(config.arm, {block->position[0], block->position[1], 0.0});
  const auto place =
      InverseKinematics(config.arm, {box->center[0], box->center[1], 0.0});
  if (!pick || !place) throw InfeasibleError("target out of reach");
  pick_ = *pick;
  place_ = *place;
}

std::vector<double> ScriptedExpert::Act(const WorldState& state) {
  switch (phase_) {
    case Phase::kApproach:
      if (!Near(state.joints, pick_)) return Command(pick_, 0.0);
      phase_ = Phase::kSettle;
      counter_ = 0;
      [[fallthrough]];
    case Phase::kSettle:
      if (counter_ < config_.settle_steps) {
        ++counter_;
        return Command(pick_, 0.0);
      }
      phase_ = Phase::kClose;
      counter_ = 0;
      [[fallthrough]];
    case Phase::kClose:
      if (counter_ < config_.lift_steps) {
        ++counter_;
        return Command(pick_, 1.0);
      }
      phase_ = Phase::kTransport;
      [[fallthrough]];
    case Phase::kTransport:
      if (!Near(state.joints, place_)) return Command(place_, 1.0);
      phase_ = Phase::kPlace;
      counter_ = 0;
      [[fallthrough]];
    case Phase::kPlace:
      if (counter_ < config_.settle_steps) {
        ++counter_;
        return Command(place_, 1.0);
      }
      phase_ = Phase::kRelease;
      [[fallthrough]];
    case Phase::kRelease:
      break;
  }
  return Command(place_, 0.0);
}

void ExpertAgent::Reset(const WorldState& state, const Observation& /*obs*/) {
  expert_ = std::make_unique<ScriptedExpert>(config_, state);
}

std::vector<double> ExpertAgent::Act(const WorldState& state,
                                     const Observation& /*obs*/) {
  if (!expert_) throw StateError("expert agent used before Reset");
  return expert_->Act(state);
}

namespace {

EpisodeOutcome RunEpisode(const WorldConfig& config, Agent& agent,
                          uint64_t seed) {
  EpisodeOutcome outcome;
  outcome.seed = seed;
  WorldState state = Reset(config, seed);
  agent.Reset(state, Observe(config, state));
  for (int t = 0; t < config.horizon; ++t) {
    const Observation obs = Observe(config, state);
    const std::vector<double> command = agent.Act(state, obs);
    const int before = state.gripper;
    state = StepWorld(config, state, command);
    if (state.gripper != before) ++outcome.gripper_transitions;
  }
  outcome.success = IsSuccess(config, state);
  outcome.trace = agent.Trace();
  return outcome;
}

}  // namespace

EvaluationResult Evaluate(const WorldConfig& config, const AgentFactory& make,
                          std::span<const uint64_t> seeds, int workers) {
  EvaluationResult result;
  result.episodes.resize(seeds.size());
  const int n_workers =
      std::clamp(workers, 1, std::max(1, static_cast<int>(seeds.size())));
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    try {
      std::unique_ptr<Agent> agent = make();
      for (size_t i = next++; i < seeds.size(); i = next++) {
        result.episodes[i] = RunEpisode(config, *agent, seeds[i]);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = seeds.size();
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  int successes = 0;
  for (const auto& e : result.episodes) successes += e.success ? 1 : 0;
  result.success_rate =
      seeds.empty() ? 0.0 : static_cast<double>(successes) / seeds.size();
  return result;
}

std::vector<uint64_t> SeedRange(uint64_t base, int n) {
  std::vector<uint64_t> seeds(static_cast<size_t>(std::max(0, n)));
  for (size_t i = 0; i < seeds.size(); ++i) seeds[i] = base + i;
  return seeds;
}

}  // namespace ghcbc::sim
