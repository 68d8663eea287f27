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

#include "ghcbc/parameters.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

constexpr char kMagic[] = "ghcbc-checkpoint";

void WriteLittleEndian(std::ostream& out, std::span<const double> values) {
  std::vector<char> bytes(values.size() * 8);
  for (size_t i = 0; i < values.size(); ++i) {
    uint64_t bits = std::bit_cast<uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void ReadLittleEndian(std::istream& in, std::span<double> values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError("checkpoint payload truncated");
  }
  for (size_t i = 0; i < values.size(); ++i) {
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<uint64_t>(bytes[i * 8 + b]) << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
}

}  // namespace

Tensor ParameterStore::Add(const std::string& name, Shape shape,
                           std::vector<double> data) {
  for (const auto& p : params_) {
    if (p.name == name) throw ConfigError("duplicate parameter name " + name);
  }
  Tensor t = Tensor::Parameter(std::move(shape), std::move(data));
  params_.push_back({name, t});
  return t;
}

Tensor ParameterStore::Uniform(const std::string& name, Shape shape,
                               double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(NumElements(shape));
  for (double& x : data) x = dist(rng_);
  return Add(name, std::move(shape), std::move(data));
}

Tensor ParameterStore::Normal(const std::string& name, Shape shape,
                              double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> data(NumElements(shape));
  for (double& x : data) x = dist(rng_);
  return Add(name, std::move(shape), std::move(data));
}

Tensor ParameterStore::Constant(const std::string& name, Shape shape,
                                double value) {
  std::vector<double> data(NumElements(shape), value);
  return Add(name, std::move(shape), std::move(data));
}

Tensor ParameterStore::Get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw StateError("no parameter named " + name);
}

int64_t ParameterStore::TotalSize() const {
  int64_t total = 0;
  for (const auto& p : params_) total += p.tensor.numel();
  return total;
}

void ParameterStore::ZeroGrad() {
  for (auto& p : params_) p.tensor.ZeroGrad();
}

void ParameterStore::Fill(double value) {
  for (auto& p : params_) {
    auto d = p.tensor.mutable_data();
    std::fill(d.begin(), d.end(), value);
  }
}

void SaveCheckpoint(const ParameterStore& store,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << kMagic << "\n";
  out << "version " << kCheckpointVersion << "\n";
  out << "parameters " << store.parameters().size() << "\n";
  for (const auto& p : store.parameters()) {
    out << p.name << " " << p.tensor.rank();
    for (int64_t extent : p.tensor.shape()) out << " " << extent;
    out << "\n";
  }
  out << "payload\n";
  for (const auto& p : store.parameters()) WriteLittleEndian(out, p.tensor.data());
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

void LoadCheckpoint(ParameterStore& store, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMagic) throw IoError(path.string() + " is not a checkpoint");
  std::string key;
  int version = 0;
  size_t count = 0;
  std::getline(in, line);
  std::istringstream(line) >> key >> version;
  if (key != "version" || version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version in " + path.string());
  }
  std::getline(in, line);
  std::istringstream(line) >> key >> count;
  if (key != "parameters" || count != store.parameters().size()) {
    throw IoError("checkpoint " + path.string() + " lists " +
                  std::to_string(count) + " parameters, model has " +
                  std::to_string(store.parameters().size()));
  }
  for (const auto& p : store.parameters()) {
    std::getline(in, line);
    std::istringstream row(line);
    std::string name;
    int rank = 0;
    row >> name >> rank;
    Shape shape(rank);
    for (auto& extent : shape) row >> extent;
    if (name != p.name || shape != p.tensor.shape()) {
      throw IoError("checkpoint manifest entry '" + line +
                    "' does not match model parameter " + p.name + " " +
                    ShapeToString(p.tensor.shape()));
    }
  }
  std::getline(in, line);
  if (line != "payload") throw IoError("checkpoint payload marker missing");
  for (const auto& p : store.parameters()) {
    Tensor t = p.tensor;
    ReadLittleEndian(in, t.mutable_data());
  }
}

void AdamStep(ParameterStore& store, AdamState& state) {
  const auto& params = store.parameters();
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor.numel(), 0.0);
      state.v.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  for (const auto& p : params) {
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        throw DivergenceError("non-finite gradient in parameter " + p.name +
                              " at step " + std::to_string(state.step + 1));
      }
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].tensor;
    const bool has_grad = t.has_grad();
    auto w = t.mutable_data();
    auto g = t.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (size_t j = 0; j < w.size(); ++j) {
      const double gj = has_grad ? g[j] : 0.0;
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
      w[j] -= state.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + state.eps);
    }
  }
}

}  // namespace ghcbc
