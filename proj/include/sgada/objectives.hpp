// Copyright 2026 The sgada Authors.
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

#pragma once

#include <cstdint>
#include <functional>

#include "sgada/tensor.hpp"

namespace sgada {

/// Non-saturating logistic critic loss:
/// mean(softplus(-real)) + mean(softplus(fake)).
Tensor loss_d(const Tensor& real_scores, const Tensor& fake_scores);

/// mean(softplus(-fake)).
Tensor loss_g(const Tensor& fake_scores);

/// Images [N, ...] -> scores [N].
using ScoreFn = std::function<Tensor(const Tensor&)>;

/// (gamma / 2) * mean_n ||d score_n / d x_n||^2, evaluated at a detached copy
/// of `real_images`. The result stays differentiable in the critic's
/// parameters.
Tensor r1_penalty(const ScoreFn& critic, const Tensor& real_images, double gamma);

struct PathLengthState {
  double ema = 0.0;
  double decay = 0.99;

  friend bool operator==(const PathLengthState&, const PathLengthState&) = default;
};

/// ema <- decay * ema + (1 - decay) * mean_norm.
PathLengthState advance_path_length(const PathLengthState& state, double mean_norm);

struct PathLengthResult {
  Tensor penalty;
  /// Per-sample Jacobian-vector norms [N], detached.
  Tensor norms;
  PathLengthState state;
};

/// w [N, w_dim] -> images [N, C, H, W].
using SynthesisFn = std::function<Tensor(const Tensor&)>;

/// Draws y ~ N(0, 1) / sqrt(H * W), forms g = d sum(G(w) * y) / dw, and
/// returns mean((|g_n| - ema)^2) with the ema advanced by mean |g_n|.
PathLengthResult path_length_penalty(const SynthesisFn& synthesize, const Tensor& w,
                                     const PathLengthState& state, std::uint64_t seed);

/// Fires on every multiple of `interval`, starting at step 0.
struct LazySchedule {
  std::uint64_t interval = 16;
  std::uint64_t step = 0;

  friend bool operator==(const LazySchedule&, const LazySchedule&) = default;
};

/// True iff schedule.step % schedule.interval == 0. Throws ConfigError for a
/// zero interval.
bool lazy_gate(const LazySchedule& schedule);

}  // namespace sgada
