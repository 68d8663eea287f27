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

#ifndef GHCBC_TESTS_SUPPORT_GRADCHECK_H_
#define GHCBC_TESTS_SUPPORT_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ghcbc/tensor.h"

namespace ghcbc::testing {

using ScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

// Central finite differences against reverse mode. Returns the largest
// norm-wise relative error ||g_a - g_n|| / max(||g_a||, ||g_n||) over the
// inputs; inputs whose gradients are both below 1e-10 count as exact.
// `inputs` become leaves that require grad.
double GradCheck(const ScalarFn& f, std::vector<Tensor> inputs,
                 double h = 1e-5);

// Uniform values in [lo, hi].
Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                    double hi = 1.0);
// Values with |x| in [margin, 1], random sign; keeps ReLU away from its kink.
Tensor AwayFromZero(const Shape& shape, std::mt19937_64& rng,
                    double margin = 1e-2);

// Sum(y * R) for a fixed random R, reducing any op to a scalar.
Tensor WeightedSum(const Tensor& y, uint64_t seed);

struct OpCase {
  std::string name;
  // Draws one random instance and returns its relative gradient error.
  std::function<double(std::mt19937_64&)> run;
};

// Every differentiable op and layer with a random-instance generator.
std::vector<OpCase> OpCatalog();

}  // namespace ghcbc::testing

#endif  // GHCBC_TESTS_SUPPORT_GRADCHECK_H_
