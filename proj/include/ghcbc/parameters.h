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

#ifndef GHCBC_PARAMETERS_H_
#define GHCBC_PARAMETERS_H_

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ghcbc/tensor.h"

namespace ghcbc {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

// Registry of trainable tensors in creation order. The order is the
// checkpoint manifest order and the optimizer's parameter order.
class ParameterStore {
 public:
  explicit ParameterStore(uint64_t seed = 0) : rng_(seed) {}

  // Uniform in [-bound, bound].
  Tensor Uniform(const std::string& name, Shape shape, double bound);
  Tensor Normal(const std::string& name, Shape shape, double stddev);
  Tensor Constant(const std::string& name, Shape shape, double value);

  const std::vector<NamedParameter>& parameters() const { return params_; }
  // Throws StateError if absent.
  Tensor Get(const std::string& name) const;
  int64_t TotalSize() const;

  void ZeroGrad();
  // Sets every parameter to `value` (used by nullity tests).
  void Fill(double value);

 private:
  Tensor Add(const std::string& name, Shape shape, std::vector<double> data);

  std::mt19937_64 rng_;
  std::vector<NamedParameter> params_;
};

// Checkpoint layout:
//   ghcbc-checkpoint\n
//   version <int>\n
//   parameters <count>\n
//   <name> <rank> <d0> ... <dn-1>\n      (one line per parameter)
//   payload\n
//   <raw little-endian float64 values, manifest order>
inline constexpr int kCheckpointVersion = 1;

void SaveCheckpoint(const ParameterStore& store,
                    const std::filesystem::path& path);
// Loads values into an already-constructed store. The manifest must list
// exactly the store's parameters, in order, with equal shapes.
void LoadCheckpoint(ParameterStore& store, const std::filesystem::path& path);

struct AdamState {
  int64_t step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

// One bias-corrected Adam update of every parameter in `store` using the
// gradients currently accumulated on them. Parameters with no gradient
// buffer are treated as having zero gradient. Throws DivergenceError naming
// the parameter when a gradient is not finite; nothing is updated then.
void AdamStep(ParameterStore& store, AdamState& state);

}  // namespace ghcbc

#endif  // GHCBC_PARAMETERS_H_
