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

#include "sgada/objectives.hpp"

#include <cmath>

#include "sgada/errors.hpp"
#include "sgada/ops.hpp"
#include "sgada/rng.hpp"

namespace sgada {

Tensor loss_d(const Tensor& real_scores, const Tensor& fake_scores) {
  return add(mean(softplus(neg(real_scores))), mean(softplus(fake_scores)));
}

Tensor loss_g(const Tensor& fake_scores) { return mean(softplus(neg(fake_scores))); }

Tensor r1_penalty(const ScoreFn& critic, const Tensor& real_images, double gamma) {
  if (real_images.rank() == 0 || real_images.dim(0) == 0) {
    throw ShapeError("r1_penalty: empty batch");
  }
  const std::size_t n = real_images.dim(0);
  const Tensor x = Tensor::from_data(real_images.shape(), real_images.to_vector(), true);
  const Tensor scores = critic(x);
  const Tensor wrt[] = {x};
  const auto grads = gradients(sum(scores), wrt, {.create_graph = true, .allow_unused = true});
  return scale(sum(square(grads[0])), 0.5 * gamma / static_cast<double>(n));
}

PathLengthState advance_path_length(const PathLengthState& state, double mean_norm) {
  PathLengthState out = state;
  out.ema = state.decay * state.ema + (1.0 - state.decay) * mean_norm;
  return out;
}

PathLengthResult path_length_penalty(const SynthesisFn& synthesize, const Tensor& w,
                                     const PathLengthState& state, std::uint64_t seed) {
  const Tensor images = synthesize(w);
  if (images.rank() != 4) {
    throw ShapeError("path_length_penalty: synthesis must return [N,C,H,W], got " +
                     shape_str(images.shape()));
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(images.dim(2) * images.dim(3)));
  std::vector<double> y(images.numel());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = normal_at(seed, i) * inv;
  const Tensor direction = Tensor::from_data(images.shape(), std::move(y));

  const Tensor wrt[] = {w};
  const auto grads = gradients(sum(mul(images, direction)), wrt,
                               {.create_graph = true, .allow_unused = true});
  const Tensor norms = l2_norm_rows(reshape(grads[0], {w.dim(0), w.numel() / w.dim(0)}));

  const Tensor centered = add_scalar(norms, -state.ema);
  PathLengthResult out;
  out.penalty = mean(square(centered));
  out.norms = norms.detach();
  double mean_norm = 0.0;
  for (double v : out.norms.data()) mean_norm += v;
  mean_norm /= static_cast<double>(out.norms.numel());
  out.state = advance_path_length(state, mean_norm);
  return out;
}

bool lazy_gate(const LazySchedule& schedule) {
  if (schedule.interval == 0) throw ConfigError("lazy interval must be positive");
  return schedule.step % schedule.interval == 0;
}

}  // namespace sgada
