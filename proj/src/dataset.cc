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

#include "ghcbc/dataset.h"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

constexpr const char* kEpisodeMagic = "ghcbc-episode";
constexpr const char* kManifestMagic = "ghcbc-dataset";
constexpr int kFormatVersion = 1;

void WriteDoubles(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(bits >> (8 * i));
    out.write(bytes, 8);
  }
}

std::vector<double> ReadDoubles(std::istream& in, size_t count,
                                const std::string& what) {
  std::vector<double> values(count);
  for (double& v : values) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
      throw DatasetError("truncated " + what + " block");
    }
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(bytes[i]) << (8 * i);
    v = std::bit_cast<double>(bits);
  }
  return values;
}

// Reads "key value..." and checks the key.
std::istringstream ExpectLine(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("missing header line " + key);
  std::istringstream fields(line);
  std::string got;
  fields >> got;
  if (got != key) {
    throw DatasetError("expected header " + key + ", got '" + line + "'");
  }
  return fields;
}

template <typename T>
T ReadField(std::istringstream& fields, const std::string& key) {
  T value{};
  if (!(fields >> value)) throw DatasetError("bad value for header " + key);
  return value;
}

}  // namespace

void Episode::Validate() const {
  if (actions.empty()) throw DatasetError("episode has no steps");
  const size_t n = actions.size();
  if (images.size() != n || joints.size() != n || ees.size() != n) {
    throw DatasetError("episode streams have unequal lengths");
  }
  for (const auto& a : actions) {
    if (a.size() != actions.front().size()) {
      throw DatasetError("episode actions have unequal widths");
    }
  }
}

Episode RecordExpertEpisode(const sim::WorldConfig& config, uint64_t seed) {
  Episode episode;
  episode.seed = seed;
  sim::WorldState state = sim::Reset(config, seed);
  sim::ScriptedExpert expert(config, state);
  for (int t = 0; t < config.horizon; ++t) {
    sim::Observation obs = sim::Observe(config, state);
    std::vector<double> command = expert.Act(state);
    episode.images.push_back(std::move(obs.image));
    episode.joints.push_back(std::move(obs.joint));
    episode.ees.push_back(obs.ee);
    state = sim::StepWorld(config, state, command);
    episode.actions.push_back(std::move(command));
  }
  episode.success = sim::IsSuccess(config, state);
  return episode;
}

std::vector<Episode> GenerateDemos(const sim::WorldConfig& config,
                                   uint64_t base_seed, int count) {
  std::vector<Episode> episodes;
  for (int i = 0; i < count; ++i) {
    Episode e = RecordExpertEpisode(config, base_seed + i);
    if (!e.success) {
      throw InfeasibleError("expert failed on seed " +
                            std::to_string(base_seed + i));
    }
    episodes.push_back(std::move(e));
  }
  return episodes;
}

void WriteEpisode(const std::filesystem::path& path, const Episode& episode,
                  const std::string& profile) {
  episode.Validate();
  const Shape& image_shape = episode.images.front().shape();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << kEpisodeMagic << "\n"
      << "version " << kFormatVersion << "\n"
      << "profile " << profile << "\n"
      << "seed " << episode.seed << "\n"
      << "length " << episode.length() << "\n"
      << "success " << (episode.success ? 1 : 0) << "\n"
      << "image";
  for (int64_t d : image_shape) out << " " << d;
  out << "\n"
      << "joint " << episode.joints.front().Vector().size() << "\n"
      << "ee 8\n"
      << "action " << episode.actions.front().size() << "\n"
      << "blocks image joint ee action\n"
      << "payload\n";
  for (const Tensor& image : episode.images) {
    if (image.shape() != image_shape) {
      throw DatasetError("episode images have unequal shapes");
    }
    WriteDoubles(out, image.data());
  }
  for (const JointPose& j : episode.joints) WriteDoubles(out, j.Vector());
  for (const EePose& e : episode.ees) WriteDoubles(out, e.Vector());
  for (const auto& a : episode.actions) WriteDoubles(out, a);
  if (!out) throw IoError("failed writing " + path.string());
}

Episode ReadEpisode(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kEpisodeMagic) {
    throw DatasetError(path.string() + " is not an episode file");
  }
  auto version_line = ExpectLine(in, "version");
  if (ReadField<int>(version_line, "version") != kFormatVersion) {
    throw DatasetError("unsupported episode version in " + path.string());
  }
  ExpectLine(in, "profile");
  Episode episode;
  auto seed_line = ExpectLine(in, "seed");
  episode.seed = ReadField<uint64_t>(seed_line, "seed");
  auto length_line = ExpectLine(in, "length");
  const int length = ReadField<int>(length_line, "length");
  auto success_line = ExpectLine(in, "success");
  episode.success = ReadField<int>(success_line, "success") != 0;
  auto image_line = ExpectLine(in, "image");
  Shape image_shape;
  int64_t d = 0;
  while (image_line >> d) image_shape.push_back(d);
  auto joint_line = ExpectLine(in, "joint");
  const size_t joint_width = ReadField<size_t>(joint_line, "joint");
  auto ee_line = ExpectLine(in, "ee");
  if (ReadField<size_t>(ee_line, "ee") != 8) {
    throw DatasetError("end-effector pose width must be 8");
  }
  auto action_line = ExpectLine(in, "action");
  const size_t action_width = ReadField<size_t>(action_line, "action");
  ExpectLine(in, "blocks");
  ExpectLine(in, "payload");
  if (length < 1) throw DatasetError(path.string() + " has no steps");
  if (image_shape.empty() || joint_width < 2 || action_width < 1) {
    throw DatasetError(path.string() + " has a malformed header");
  }

  const size_t image_size = static_cast<size_t>(NumElements(image_shape));
  for (int t = 0; t < length; ++t) {
    episode.images.push_back(Tensor::FromVector(
        image_shape, ReadDoubles(in, image_size, "image")));
  }
  for (int t = 0; t < length; ++t) {
    std::vector<double> v = ReadDoubles(in, joint_width, "joint");
    JointPose pose;
    pose.gripper = v.back();
    v.pop_back();
    pose.angles = std::move(v);
    episode.joints.push_back(std::move(pose));
  }
  for (int t = 0; t < length; ++t) {
    const std::vector<double> v = ReadDoubles(in, 8, "ee");
    EePose pose;
    pose.position = {v[0], v[1], v[2]};
    pose.orientation = {v[3], v[4], v[5], v[6]};
    pose.gripper = v[7];
    episode.ees.push_back(pose);
  }
  for (int t = 0; t < length; ++t) {
    episode.actions.push_back(ReadDoubles(in, action_width, "action"));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DatasetError("trailing bytes in " + path.string());
  }
  episode.Validate();
  return episode;
}

void WriteDataset(const std::filesystem::path& dir,
                  const std::vector<Episode>& episodes,
                  const std::string& profile) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (size_t i = 0; i < episodes.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "episode_%05zu.bin", i);
    WriteEpisode(dir / name, episodes[i], profile);
    names.emplace_back(name);
  }
  const auto manifest = dir / kManifestName;
  const auto partial = dir / (std::string(kManifestName) + ".partial");
  {
    std::ofstream out(partial, std::ios::trunc);
    if (!out) throw IoError("cannot write " + partial.string());
    out << kManifestMagic << "\nversion " << kFormatVersion << "\nprofile "
        << profile << "\nepisodes " << names.size() << "\n";
    for (const auto& n : names) out << n << "\n";
    if (!out) throw IoError("failed writing " + partial.string());
  }
  std::filesystem::rename(partial, manifest);
}

std::vector<Episode> ReadDataset(const std::filesystem::path& dir) {
  const auto manifest = dir / kManifestName;
  std::ifstream in(manifest);
  if (!in) throw IoError("missing dataset manifest " + manifest.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kManifestMagic) {
    throw DatasetError(manifest.string() + " is not a dataset manifest");
  }
  auto version_line = ExpectLine(in, "version");
  if (ReadField<int>(version_line, "version") != kFormatVersion) {
    throw DatasetError("unsupported dataset version");
  }
  ExpectLine(in, "profile");
  auto count_line = ExpectLine(in, "episodes");
  const int count = ReadField<int>(count_line, "episodes");
  if (count < 1) throw DatasetError("dataset " + dir.string() + " is empty");
  std::vector<Episode> episodes;
  for (int i = 0; i < count; ++i) {
    std::string name;
    if (!std::getline(in, name) || name.empty()) {
      throw DatasetError("manifest lists fewer episodes than declared");
    }
    episodes.push_back(ReadEpisode(dir / name));
  }
  return episodes;
}

}  // namespace ghcbc
