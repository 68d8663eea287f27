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

#ifndef GHCBC_CONFIG_H_
#define GHCBC_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ghcbc/policy.h"
#include "ghcbc/sim.h"
#include "ghcbc/trainer.h"

namespace ghcbc {

// Everything a CLI run needs. Keys are addressed as dotted paths
// ("model.d_model", "train.steps", ...) both in YAML files and overrides.
// `seed` drives model initialization and the trainer's sampling stream;
// demonstration and evaluation seeds are separate keys.
struct RunConfig {
  std::string profile = "desk";
  uint64_t seed = 0;
  ModelConfig model;
  TrainConfig train;
  sim::WorldConfig world;
  int demo_count = 50;
  uint64_t demo_seed = 0;

  // Profile defaults; throws ConfigError for names other than desk/paper.
  static RunConfig ForProfile(const std::string& profile);

  // Sets one dotted key from a YAML scalar or flow sequence. Unknown keys
  // and unparsable values throw ConfigError.
  void Set(const std::string& key, const std::string& value);
  // Applies every leaf of a YAML document.
  void MergeYaml(const std::string& text);
  // "key=value".
  void ApplyOverride(const std::string& assignment);

  // Commented YAML with every key; loads back to an equal config.
  std::string ToYaml() const;
  static std::vector<std::string> Keys();

  // Also checks that the camera renders what the vision encoder expects.
  void Validate() const;
};

// Reads `path`, whose `profile` key (if any) picks the defaults, then
// applies `overrides` in order.
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::string& profile,
                        const std::vector<std::string>& overrides);

}  // namespace ghcbc

#endif  // GHCBC_CONFIG_H_
