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

#ifndef GHCBC_HCBC_H_
#define GHCBC_HCBC_H_

#include <deque>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ghcbc/nn.h"
#include "ghcbc/vision.h"

namespace ghcbc {

// Paired FIFOs of past vision tokens and executed actions, oldest first.
// Stored vision tokens are detached: no gradient flows back through history.
class HistoryBuffers {
 public:
  explicit HistoryBuffers(int capacity);

  // Appends one (vision, action) pair, dropping the oldest pair when full.
  // Both halves are required; a missing one is a ContractError.
  void Push(const std::optional<VisionTokens>& vision,
            const std::optional<std::vector<double>>& action);
  void Clear();

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(actions_.size()); }
  bool empty() const { return actions_.empty(); }
  const std::deque<Tensor>& vision() const { return vision_; }
  const std::deque<std::vector<double>>& actions() const { return actions_; }

 private:
  int capacity_;
  std::deque<Tensor> vision_;
  std::deque<std::vector<double>> actions_;
};

// Gaussian latent with sigma = exp(0.5 * logvar).
struct HcLatent {
  Tensor mu;      // (1, latent)
  Tensor logvar;  // (1, latent)
  Tensor sample;  // (1, latent)

  std::vector<double> sigma() const;
  static HcLatent FromMeanSigma(const std::vector<double>& mu,
                                const std::vector<double>& sigma);
};

// The single HC token, shape (1, d_model).
struct HcFeature {
  Tensor xi;
};

enum class LatentMode { kTrain, kEval };

struct HistoryEncoderConfig {
  int d_model = 32;
  int history_k = 20;
  int action_dim = 4;
  int layers = 4;
  int heads = 8;
  int ff_hidden = 64;
  int latent_dim = 32;
  // False drops the vision stream (action-only history).
  bool use_vision = true;
};

// [CLS] + vision-history + action-history transformer with a KL-regularized
// latent bottleneck.
class HistoryEncoder {
 public:
  HistoryEncoder(ParameterStore& store, const std::string& name,
                 const HistoryEncoderConfig& config);

  // ((2k+1), d) with vision, ((k+1), d) without. Missing entries are zero
  // rows at the oldest positions.
  Tensor AssembleTokens(const HistoryBuffers& buffers) const;

  // Train mode draws epsilon from `rng`; eval mode uses the mean.
  std::pair<HcFeature, HcLatent> Encode(const Tensor& tokens, LatentMode mode,
                                        std::mt19937_64* rng) const;

  const HistoryEncoderConfig& config() const { return config_; }

 private:
  HistoryEncoderConfig config_;
  Tensor cls_;
  nn::Linear action_proj_;
  Tensor position_;  // (k, d)
  nn::TransformerEncoder encoder_;
  nn::Linear mu_head_, logvar_head_, out_proj_;
};

// 0.5 * sum(mu^2 + sigma^2 - ln sigma^2 - 1), shape (1).
Tensor KlLoss(const HcLatent& latent);

struct StyleEncoderConfig {
  int d_model = 32;
  int chunk_k = 20;
  int action_dim = 4;
  int pose_dim = 4;
  int layers = 4;
  int heads = 8;
  int ff_hidden = 64;
  int latent_dim = 32;
};

// Conditional-VAE "style variable" encoder over (pose, target chunk), the
// baseline trainer. At evaluation the latent is the prior mean (zeros).
class StyleEncoder {
 public:
  StyleEncoder(ParameterStore& store, const std::string& name,
               const StyleEncoderConfig& config);

  // Train mode needs the target chunk (chunk_k, action_dim).
  std::pair<HcFeature, HcLatent> Encode(const std::vector<double>& pose,
                                        const Tensor* target_chunk,
                                        LatentMode mode,
                                        std::mt19937_64* rng) const;

 private:
  StyleEncoderConfig config_;
  Tensor cls_;
  nn::Linear pose_proj_, action_proj_;
  Tensor position_;  // (k+2, d)
  nn::TransformerEncoder encoder_;
  nn::Linear mu_head_, logvar_head_, out_proj_;
};

}  // namespace ghcbc

#endif  // GHCBC_HCBC_H_
