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

#include "ghcbc/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

struct Entry {
  std::string key;
  std::string comment;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const YAML::Node&)> set;
};

template <typename T>
T As(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for " + key);
  }
}

// Shortest text that parses back to the same double.
std::string Str(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

Entry IntEntry(std::string key, std::string comment,
               std::function<int&(RunConfig&)> ref) {
  auto get = [ref](const RunConfig& c) {
    return std::to_string(ref(const_cast<RunConfig&>(c)));
  };
  auto set = [ref, key](RunConfig& c, const YAML::Node& n) {
    ref(c) = As<int>(n, key);
  };
  return {key, std::move(comment), get, set};
}

Entry SeedEntry(std::string key, std::string comment,
                std::function<uint64_t&(RunConfig&)> ref) {
  auto get = [ref](const RunConfig& c) {
    return std::to_string(ref(const_cast<RunConfig&>(c)));
  };
  auto set = [ref, key](RunConfig& c, const YAML::Node& n) {
    ref(c) = As<uint64_t>(n, key);
  };
  return {key, std::move(comment), get, set};
}

Entry DoubleEntry(std::string key, std::string comment,
                  std::function<double&(RunConfig&)> ref) {
  auto get = [ref](const RunConfig& c) {
    return Str(ref(const_cast<RunConfig&>(c)));
  };
  auto set = [ref, key](RunConfig& c, const YAML::Node& n) {
    ref(c) = As<double>(n, key);
  };
  return {key, std::move(comment), get, set};
}

Entry BoolEntry(std::string key, std::string comment,
                std::function<bool&(RunConfig&)> ref) {
  auto get = [ref](const RunConfig& c) {
    return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
  };
  auto set = [ref, key](RunConfig& c, const YAML::Node& n) {
    ref(c) = As<bool>(n, key);
  };
  return {key, std::move(comment), get, set};
}

const std::vector<Entry>& Registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(SeedEntry("seed", "model initialization and batch sampling",
                          [](RunConfig& c) -> uint64_t& { return c.seed; }));

    e.push_back(IntEntry(
        "model.d_model", "hidden width of every token (paper profile: 512)",
        [](RunConfig& c) -> int& { return c.model.policy.d_model; }));
    e.push_back(IntEntry("model.n_heads", "Attention heads",
                         [](RunConfig& c) -> int& { return c.model.policy.n_heads; }));
    e.push_back(IntEntry(
        "model.enc_layers", "Constrained Pose Transformer encoder layers",
        [](RunConfig& c) -> int& { return c.model.policy.enc_layers; }));
    e.push_back(IntEntry(
        "model.dec_layers", "Constrained Pose Transformer decoder layers",
        [](RunConfig& c) -> int& { return c.model.policy.dec_layers; }));
    e.push_back(IntEntry(
        "model.hcbc_layers", "HCBC Transformer encoder layers",
        [](RunConfig& c) -> int& { return c.model.policy.hcbc_layers; }));
    e.push_back(IntEntry("model.ff_dim", "feed-forward hidden width",
                         [](RunConfig& c) -> int& { return c.model.policy.ff_dim; }));
    e.push_back(IntEntry("model.chunk_k", "Chunking size",
                         [](RunConfig& c) -> int& { return c.model.policy.chunk_k; }));
    e.push_back(IntEntry("model.history_k", "History length",
                         [](RunConfig& c) -> int& { return c.model.policy.history_k; }));
    e.push_back(IntEntry("model.latent_dim", "history latent width",
                         [](RunConfig& c) -> int& { return c.model.policy.latent_dim; }));
    e.push_back(IntEntry("model.action_dim", "action vector length",
                         [](RunConfig& c) -> int& { return c.model.policy.action_dim; }));
    e.push_back(IntEntry("model.n_joints", "arm joints in the joint pose",
                         [](RunConfig& c) -> int& { return c.model.n_joints; }));
    e.push_back(DoubleEntry(
        "model.gripper_close", "Gripper close threshold",
        [](RunConfig& c) -> double& { return c.model.policy.gripper_close; }));
    e.push_back(DoubleEntry(
        "model.gripper_open", "Gripper open threshold",
        [](RunConfig& c) -> double& { return c.model.policy.gripper_open; }));
    e.push_back(DoubleEntry(
        "model.kl_beta", "KL weight beta",
        [](RunConfig& c) -> double& { return c.model.policy.kl_beta; }));

    auto list_entry = [](std::string key, std::string comment,
                         std::vector<double>& (*ref)(RunConfig&)) {
      auto get = [ref](const RunConfig& c) {
        const auto& v = ref(const_cast<RunConfig&>(c));
        std::string s = "[";
        for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + Str(v[i]);
        return s + "]";
      };
      auto set = [ref, key](RunConfig& c, const YAML::Node& n) {
        ref(c) = As<std::vector<double>>(n, key);
      };
      return Entry{std::move(key), std::move(comment), get, set};
    };
    e.push_back(list_entry(
        "model.action_mean", "action standardization mean (from the demos if empty)",
        [](RunConfig& c) -> std::vector<double>& { return c.model.action_mean; }));
    e.push_back(list_entry(
        "model.action_scale", "action standardization scale",
        [](RunConfig& c) -> std::vector<double>& { return c.model.action_scale; }));
    e.push_back(BoolEntry(
        "model.relative_actions", "actions relative to the pose at each step",
        [](RunConfig& c) -> bool& { return c.model.relative_actions; }));

    e.push_back(IntEntry(
        "vision.image_channels", "input image channels",
        [](RunConfig& c) -> int& { return c.model.vision.image_channels; }));
    e.push_back(IntEntry("vision.image_h", "input image height",
                         [](RunConfig& c) -> int& { return c.model.vision.image_h; }));
    e.push_back(IntEntry("vision.image_w", "input image width",
                         [](RunConfig& c) -> int& { return c.model.vision.image_w; }));
    e.push_back(Entry{
        "vision.backbone_channels",
        "Vision encoder: stride-2 conv channels (paper profile ends at 1280)",
        [](const RunConfig& c) {
          std::string s = "[";
          const auto& ch = c.model.vision.backbone_channels;
          for (size_t i = 0; i < ch.size(); ++i) {
            s += (i ? ", " : "") + std::to_string(ch[i]);
          }
          return s + "]";
        },
        [](RunConfig& c, const YAML::Node& n) {
          c.model.vision.backbone_channels =
              As<std::vector<int>>(n, "vision.backbone_channels");
        }});
    e.push_back(BoolEntry(
        "vision.coord_channels", "append coordinate planes to the image",
        [](RunConfig& c) -> bool& { return c.model.vision.coord_channels; }));
    e.push_back(IntEntry("vision.feat_h", "feature map height",
                         [](RunConfig& c) -> int& { return c.model.vision.feat_h; }));
    e.push_back(IntEntry("vision.feat_w", "feature map width",
                         [](RunConfig& c) -> int& { return c.model.vision.feat_w; }));

    e.push_back(BoolEntry(
        "ablation.gc_enabled", "GCBC pose tokens",
        [](RunConfig& c) -> bool& { return c.model.ablation.gc_enabled; }));
    e.push_back(Entry{
        "ablation.input_pose_mode", "raw pose tokens: none | joint | ee | joint_ee",
        [](const RunConfig& c) { return ToString(c.model.ablation.input_pose_mode); },
        [](RunConfig& c, const YAML::Node& n) {
          c.model.ablation.input_pose_mode = ParsePoseInputMode(
              As<std::string>(n, "ablation.input_pose_mode"));
        }});
    e.push_back(Entry{
        "ablation.pose_output", "action space: joint | ee",
        [](const RunConfig& c) { return ToString(c.model.ablation.pose_output); },
        [](RunConfig& c, const YAML::Node& n) {
          c.model.ablation.pose_output =
              ParsePoseOutput(As<std::string>(n, "ablation.pose_output"));
        }});
    e.push_back(Entry{
        "ablation.hc_mode",
        "history token: none | action_only | action_image | style_variable",
        [](const RunConfig& c) { return ToString(c.model.ablation.hc_mode); },
        [](RunConfig& c, const YAML::Node& n) {
          c.model.ablation.hc_mode =
              ParseHcMode(As<std::string>(n, "ablation.hc_mode"));
        }});
    e.push_back(BoolEntry(
        "ablation.clear_on_transition",
        "clear history and chunk buffers at gripper transitions",
        [](RunConfig& c) -> bool& { return c.model.ablation.clear_on_transition; }));

    e.push_back(IntEntry("train.batch_size", "samples per optimizer step",
                         [](RunConfig& c) -> int& { return c.train.batch_size; }));
    e.push_back(IntEntry("train.steps", "optimizer steps",
                         [](RunConfig& c) -> int& { return c.train.steps; }));
    e.push_back(IntEntry("train.eval_every", "steps between online evaluations",
                         [](RunConfig& c) -> int& { return c.train.eval_every; }));
    e.push_back(IntEntry("train.eval_episodes", "episodes per evaluation",
                         [](RunConfig& c) -> int& { return c.train.eval_episodes; }));
    e.push_back(SeedEntry("train.eval_seed", "first evaluation episode seed",
                          [](RunConfig& c) -> uint64_t& { return c.train.eval_seed; }));
    e.push_back(IntEntry("train.eval_workers", "parallel evaluation threads",
                         [](RunConfig& c) -> int& { return c.train.eval_workers; }));
    e.push_back(DoubleEntry("train.lr", "Adam learning rate",
                            [](RunConfig& c) -> double& { return c.train.lr; }));
    e.push_back(DoubleEntry(
        "train.ensemble_m", "temporal ensembling decay m",
        [](RunConfig& c) -> double& { return c.train.ensemble.m; }));
    e.push_back(BoolEntry(
        "train.ensemble_newest_first", "weight index 0 on the newest prediction",
        [](RunConfig& c) -> bool& { return c.train.ensemble.newest_first; }));

    e.push_back(IntEntry("world.horizon", "episode length T",
                         [](RunConfig& c) -> int& { return c.world.horizon; }));
    e.push_back(IntEntry("world.settle_steps", "expert dwell before grasp and release",
                         [](RunConfig& c) -> int& { return c.world.settle_steps; }));
    e.push_back(IntEntry("world.lift_steps", "expert dwell after closing",
                         [](RunConfig& c) -> int& { return c.world.lift_steps; }));
    e.push_back(DoubleEntry("world.rate_limit", "max joint change per step (rad)",
                            [](RunConfig& c) -> double& { return c.world.arm.rate_limit; }));
    e.push_back(DoubleEntry("world.joint_limit", "joint angle bound (rad)",
                            [](RunConfig& c) -> double& { return c.world.arm.joint_limit; }));
    e.push_back(IntEntry(
        "world.target_block_color", "palette id of the block to pick",
        [](RunConfig& c) -> int& { return c.world.task.target_block_color; }));
    e.push_back(IntEntry(
        "world.target_box_color", "palette id of the destination box",
        [](RunConfig& c) -> int& { return c.world.task.target_box_color; }));
    e.push_back(IntEntry("world.n_blocks", "blocks on the table",
                         [](RunConfig& c) -> int& { return c.world.task.n_blocks; }));
    e.push_back(IntEntry("world.n_boxes", "boxes on the table",
                         [](RunConfig& c) -> int& { return c.world.task.n_boxes; }));
    e.push_back(DoubleEntry(
        "world.block_min_separation", "Minimum distance of blocks",
        [](RunConfig& c) -> double& { return c.world.task.block_min_separation; }));
    e.push_back(DoubleEntry(
        "world.box_min_separation", "minimum distance between box centers",
        [](RunConfig& c) -> double& { return c.world.task.box_min_separation; }));
    e.push_back(DoubleEntry(
        "world.grasp_radius", "snap-grasp reach around the gripper",
        [](RunConfig& c) -> double& { return c.world.task.grasp_radius; }));
    e.push_back(DoubleEntry(
        "world.pixel_size", "wrist camera world units per pixel",
        [](RunConfig& c) -> double& { return c.world.camera.pixel_size; }));

    e.push_back(IntEntry("demos.count", "expert demonstrations to generate",
                         [](RunConfig& c) -> int& { return c.demo_count; }));
    e.push_back(SeedEntry("demos.seed", "first demonstration seed",
                          [](RunConfig& c) -> uint64_t& { return c.demo_seed; }));
    return e;
  }();
  return entries;
}

const Entry& Find(const std::string& key) {
  for (const Entry& e : Registry()) {
    if (e.key == key) return e;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void Flatten(const YAML::Node& node, const std::string& prefix,
             std::vector<std::pair<std::string, YAML::Node>>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      Flatten(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else {
    out.emplace_back(prefix, node);
  }
}

YAML::Node ParseYaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
}

}  // namespace

RunConfig RunConfig::ForProfile(const std::string& profile) {
  RunConfig c;
  c.profile = profile;
  if (profile == "desk") {
    c.model = ModelConfig::Desk();
  } else if (profile == "paper") {
    c.model = ModelConfig::Paper();
  } else {
    throw ConfigError("unknown profile '" + profile + "' (desk or paper)");
  }
  return c;
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  if (key == "profile") {
    throw ConfigError("profile can only be chosen with --profile or at the top "
                      "of the config file");
  }
  Find(key).set(*this, ParseYaml(value));
  model.vision.d_model = model.policy.d_model;
  train.seed = seed;
}

void RunConfig::MergeYaml(const std::string& text) {
  const YAML::Node root = ParseYaml(text);
  if (!root || root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError("config root must be a mapping");
  std::vector<std::pair<std::string, YAML::Node>> leaves;
  Flatten(root, "", leaves);
  for (const auto& [key, node] : leaves) {
    if (key == "profile") continue;
    Find(key).set(*this, node);
  }
  model.vision.d_model = model.policy.d_model;
  train.seed = seed;
}

void RunConfig::ApplyOverride(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  Set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string RunConfig::ToYaml() const {
  std::ostringstream out;
  out << "profile: " << profile << "\n";
  std::string section;
  for (const Entry& e : Registry()) {
    const auto dot = e.key.find('.');
    std::string leaf = e.key;
    if (dot != std::string::npos) {
      const std::string head = e.key.substr(0, dot);
      leaf = e.key.substr(dot + 1);
      if (head != section) {
        out << head << ":\n";
        section = head;
      }
      out << "  ";
    }
    out << leaf << ": " << e.get(*this) << "  # " << e.comment << "\n";
  }
  return out.str();
}

std::vector<std::string> RunConfig::Keys() {
  std::vector<std::string> keys;
  for (const Entry& e : Registry()) keys.push_back(e.key);
  return keys;
}

void RunConfig::Validate() const {
  model.Validate();
  train.Validate();
  world.task.Validate();
  if (world.horizon < 1) throw ConfigError("world.horizon must be positive");
  if (demo_count < 1) throw ConfigError("demos.count must be positive");
  if (model.n_joints != sim::kNumJoints) {
    throw ConfigError("the desk world has " + std::to_string(sim::kNumJoints) +
                      " joints; model.n_joints is " +
                      std::to_string(model.n_joints));
  }
  if (model.policy.action_dim != sim::ActionDim(model.ablation.pose_output)) {
    throw ConfigError("model.action_dim must be " +
                      std::to_string(sim::ActionDim(model.ablation.pose_output)) +
                      " in the desk world");
  }
  const VisionConfig& v = model.vision;
  if (v.image_channels != sim::kImageChannels ||
      v.image_h != world.camera.height ||
      v.image_w != world.camera.width) {
    throw ConfigError("vision input " + std::to_string(v.image_channels) + "x" +
                      std::to_string(v.image_h) + "x" +
                      std::to_string(v.image_w) +
                      " does not match the " +
                      std::to_string(sim::kImageChannels) + "x" +
                      std::to_string(world.camera.height) + "x" +
                      std::to_string(world.camera.width) + " wrist camera");
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::string& profile,
                        const std::vector<std::string>& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  std::string chosen = profile;
  if (chosen.empty()) {
    const YAML::Node root = ParseYaml(text);
    chosen = root && root.IsMap() && root["profile"]
                 ? As<std::string>(root["profile"], "profile")
                 : "desk";
  }
  RunConfig config = RunConfig::ForProfile(chosen);
  config.MergeYaml(text);
  for (const auto& o : overrides) config.ApplyOverride(o);
  return config;
}

}  // namespace ghcbc
