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

#ifndef GHCBC_DATASET_H_
#define GHCBC_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ghcbc/gcbc.h"
#include "ghcbc/sim.h"
#include "ghcbc/tensor.h"

namespace ghcbc {

// One demonstration: per-step observation and the joint command the expert
// issued at that step (3 joints + gripper).
struct Episode {
  uint64_t seed = 0;
  bool success = false;
  std::vector<Tensor> images;  // each (C, H, W)
  std::vector<JointPose> joints;
  std::vector<EePose> ees;
  std::vector<std::vector<double>> actions;

  int length() const { return static_cast<int>(actions.size()); }
  // Throws DatasetError on empty or ragged streams.
  void Validate() const;
};

// Rolls out the scripted expert for the full horizon.
Episode RecordExpertEpisode(const sim::WorldConfig& config, uint64_t seed);

// Episodes for seeds base, base+1, ...; throws InfeasibleError if any
// demonstration fails.
std::vector<Episode> GenerateDemos(const sim::WorldConfig& config,
                                   uint64_t base_seed, int count);

void WriteEpisode(const std::filesystem::path& path, const Episode& episode,
                  const std::string& profile);
Episode ReadEpisode(const std::filesystem::path& path);

// Writes one file per episode, then the manifest listing them.
void WriteDataset(const std::filesystem::path& dir,
                  const std::vector<Episode>& episodes,
                  const std::string& profile);
// Reads the manifest and every listed episode. Throws IoError if the
// manifest is missing and DatasetError on malformed content.
std::vector<Episode> ReadDataset(const std::filesystem::path& dir);

inline constexpr const char* kManifestName = "manifest.txt";

}  // namespace ghcbc

#endif  // GHCBC_DATASET_H_
