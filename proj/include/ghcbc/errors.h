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

#ifndef GHCBC_ERRORS_H_
#define GHCBC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ghcbc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not agree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value, unknown key or inconsistent profile.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Stateful object used before initialization or in the wrong phase.
class StateError : public Error {
 public:
  using Error::Error;
};

// Caller broke an API contract (e.g. half of a paired argument missing).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during optimization.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed or empty demonstration dataset.
class DatasetError : public Error {
 public:
  using Error::Error;
};

// Task specification cannot be realized (sampling or reachability).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Runtime stepped past the configured episode horizon.
class EpisodeEndError : public Error {
 public:
  using Error::Error;
};

// Temporal ensembling asked for a slot that holds no predictions.
class NoPredictionError : public Error {
 public:
  using Error::Error;
};

// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ghcbc

#endif  // GHCBC_ERRORS_H_
