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

#include "ghcbc/hcbc.h"

#include <cmath>

#include "ghcbc/errors.h"

namespace ghcbc {
namespace {

Tensor SampleLatent(const Tensor& mu, const Tensor& logvar,
                    std::mt19937_64* rng) {
  if (rng == nullptr) throw ContractError("train-mode latent needs an rng");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eps(mu.numel());
  for (double& e : eps) e = normal(*rng);
  Tensor noise = Tensor::FromVector(mu.shape(), std::move(eps));
  return Add(mu, Mul(Exp(Scale(logvar, 0.5)), noise));
}

}  // namespace

HistoryBuffers::HistoryBuffers(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw ConfigError("history capacity must be positive");
}

void HistoryBuffers::Push(const std::optional<VisionTokens>& vision,
                          const std::optional<std::vector<double>>& action) {
  if (!vision.has_value() || !action.has_value()) {
    throw ContractError(
        "history push needs both a vision entry and an action entry");
  }
  vision_.push_back(vision->tokens.Detach());
  actions_.push_back(*action);
  while (static_cast<int>(actions_.size()) > capacity_) {
    vision_.pop_front();
    actions_.pop_front();
  }
}

void HistoryBuffers::Clear() {
  vision_.clear();
  actions_.clear();
}

std::vector<double> HcLatent::sigma() const {
  std::vector<double> s(logvar.numel());
  for (size_t i = 0; i < s.size(); ++i) s[i] = std::exp(0.5 * logvar.data()[i]);
  return s;
}

HcLatent HcLatent::FromMeanSigma(const std::vector<double>& mu,
                                 const std::vector<double>& sigma) {
  if (mu.size() != sigma.size()) {
    throw DimensionError("latent mean and sigma lengths differ");
  }
  const int64_t n = static_cast<int64_t>(mu.size());
  std::vector<double> logvar(sigma.size());
  for (size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw ContractError("latent sigma must be positive");
    logvar[i] = 2.0 * std::log(sigma[i]);
  }
  HcLatent latent;
  latent.mu = Tensor::FromVector({1, n}, mu);
  latent.logvar = Tensor::FromVector({1, n}, std::move(logvar));
  latent.sample = latent.mu;
  return latent;
}

HistoryEncoder::HistoryEncoder(ParameterStore& store, const std::string& name,
                               const HistoryEncoderConfig& config)
    : config_(config) {
  const int d = config_.d_model;
  cls_ = store.Normal(name + ".cls", {1, d}, 1.0);
  action_proj_ = nn::Linear(store, name + ".action_proj", config_.action_dim, d);
  position_ = nn::SinusoidalTable(config_.history_k, d);
  encoder_ = nn::TransformerEncoder(store, name + ".encoder", config_.layers, d,
                                    config_.heads, config_.ff_hidden);
  mu_head_ = nn::Linear(store, name + ".mu", d, config_.latent_dim);
  logvar_head_ = nn::Linear(store, name + ".logvar", d, config_.latent_dim);
  out_proj_ = nn::Linear(store, name + ".out", config_.latent_dim, d);
}

Tensor HistoryEncoder::AssembleTokens(const HistoryBuffers& buffers) const {
  const int k = config_.history_k;
  const int d = config_.d_model;
  const int n = std::min(buffers.size(), k);
  const int pad = k - n;
  const int skip = buffers.size() - n;

  std::vector<Tensor> parts = {cls_};
  if (config_.use_vision) {
    // Mean over spatial tokens of each stored frame; stored frames are
    // constants, so this is plain arithmetic.
    std::vector<double> rows(static_cast<size_t>(k) * d, 0.0);
    for (int i = 0; i < n; ++i) {
      const Tensor& frame = buffers.vision()[skip + i];
      if (frame.dim(1) != d) {
        throw DimensionError("stored vision tokens have width " +
                             std::to_string(frame.dim(1)) + ", expected " +
                             std::to_string(d));
      }
      const int64_t count = frame.dim(0);
      double* dst = &rows[static_cast<size_t>(pad + i) * d];
      for (int64_t t = 0; t < count; ++t) {
        for (int j = 0; j < d; ++j) dst[j] += frame.data()[t * d + j];
      }
      for (int j = 0; j < d; ++j) dst[j] /= static_cast<double>(count);
    }
    parts.push_back(
        Add(Tensor::FromVector({k, d}, std::move(rows)), position_));
  }

  Tensor actions;
  if (n == 0) {
    actions = Tensor::Zeros({k, d});
  } else {
    std::vector<double> raw;
    raw.reserve(static_cast<size_t>(n) * config_.action_dim);
    for (int i = 0; i < n; ++i) {
      const auto& a = buffers.actions()[skip + i];
      if (static_cast<int>(a.size()) != config_.action_dim) {
        throw DimensionError("stored action has length " +
                             std::to_string(a.size()) + ", expected " +
                             std::to_string(config_.action_dim));
      }
      raw.insert(raw.end(), a.begin(), a.end());
    }
    actions = action_proj_(
        Tensor::FromVector({n, config_.action_dim}, std::move(raw)));
    if (pad > 0) actions = Concat({Tensor::Zeros({pad, d}), actions}, 0);
  }
  parts.push_back(Add(actions, position_));
  return Concat(parts, 0);
}

std::pair<HcFeature, HcLatent> HistoryEncoder::Encode(
    const Tensor& tokens, LatentMode mode, std::mt19937_64* rng) const {
  Tensor h = encoder_(tokens);
  Tensor summary = Slice(h, 0, 0, 1);
  HcLatent latent;
  latent.mu = mu_head_(summary);
  latent.logvar = logvar_head_(summary);
  latent.sample = mode == LatentMode::kTrain
                      ? SampleLatent(latent.mu, latent.logvar, rng)
                      : latent.mu;
  return {HcFeature{out_proj_(latent.sample)}, latent};
}

Tensor KlLoss(const HcLatent& latent) {
  Tensor terms = Sub(Add(Mul(latent.mu, latent.mu), Exp(latent.logvar)),
                     latent.logvar);
  return Scale(Sum(AddScalar(terms, -1.0)), 0.5);
}

StyleEncoder::StyleEncoder(ParameterStore& store, const std::string& name,
                           const StyleEncoderConfig& config)
    : config_(config) {
  const int d = config_.d_model;
  cls_ = store.Normal(name + ".cls", {1, d}, 1.0);
  pose_proj_ = nn::Linear(store, name + ".pose_proj", config_.pose_dim, d);
  action_proj_ = nn::Linear(store, name + ".action_proj", config_.action_dim, d);
  position_ = nn::SinusoidalTable(config_.chunk_k + 2, d);
  encoder_ = nn::TransformerEncoder(store, name + ".encoder", config_.layers, d,
                                    config_.heads, config_.ff_hidden);
  mu_head_ = nn::Linear(store, name + ".mu", d, config_.latent_dim);
  logvar_head_ = nn::Linear(store, name + ".logvar", d, config_.latent_dim);
  out_proj_ = nn::Linear(store, name + ".out", config_.latent_dim, d);
}

std::pair<HcFeature, HcLatent> StyleEncoder::Encode(
    const std::vector<double>& pose, const Tensor* target_chunk,
    LatentMode mode, std::mt19937_64* rng) const {
  const int64_t latent_dim = config_.latent_dim;
  HcLatent latent;
  if (mode == LatentMode::kEval) {
    latent.mu = Tensor::Zeros({1, latent_dim});
    latent.logvar = Tensor::Zeros({1, latent_dim});
    latent.sample = latent.mu;
    return {HcFeature{out_proj_(latent.sample)}, latent};
  }
  if (target_chunk == nullptr) {
    throw ContractError("style encoder needs the target chunk in train mode");
  }
  if (static_cast<int>(pose.size()) != config_.pose_dim) {
    throw DimensionError("style encoder pose has length " +
                         std::to_string(pose.size()));
  }
  Tensor pose_row = pose_proj_(
      Tensor::FromVector({1, config_.pose_dim}, std::vector<double>(pose)));
  Tensor tokens = Concat({cls_, pose_row, action_proj_(*target_chunk)}, 0);
  Tensor h = encoder_(Add(tokens, position_));
  Tensor summary = Slice(h, 0, 0, 1);
  latent.mu = mu_head_(summary);
  latent.logvar = logvar_head_(summary);
  latent.sample = SampleLatent(latent.mu, latent.logvar, rng);
  return {HcFeature{out_proj_(latent.sample)}, latent};
}

}  // namespace ghcbc
