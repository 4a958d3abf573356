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

#include "sgada/optimizer.hpp"

#include <cmath>

#include "sgada/errors.hpp"

namespace sgada {

double equalized_lr_multiplier(std::string_view name, const Shape& shape, double mapping_mult) {
  double mult = name.starts_with("mapping.") ? mapping_mult : 1.0;
  if (name.ends_with(".weight") && shape.size() >= 2) {
    const std::size_t fan_in = shape.size() == 4 ? shape[1] * shape[2] * shape[3] : shape[0];
    mult /= std::sqrt(static_cast<double>(fan_in));
  }
  return mult;
}

Adam::Adam(ParamList params, AdamOptions options, std::vector<double> lr_multipliers)
    : params_(std::move(params)), options_(options), multipliers_(std::move(lr_multipliers)) {
  if (multipliers_.size() != params_.size()) {
    throw ConfigError("Adam: one learning-rate multiplier per parameter is required");
  }
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

std::vector<Tensor> Adam::tensors() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.tensor);
  return out;
}

void Adam::step(const std::vector<Tensor>& grads) {
  if (grads.size() != params_.size()) throw ShapeError("Adam::step: gradient count mismatch");
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  std::vector<double> next;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor param = params_[i].tensor;
    auto value = param.data();
    next.assign(value.begin(), value.end());
    auto& m = m_[i];
    auto& v = v_[i];
    const bool has_grad = grads[i].defined();
    if (has_grad && grads[i].numel() != next.size()) {
      throw ShapeError("Adam::step: gradient shape mismatch for " + params_[i].name);
    }
    const double lr = options_.lr * multipliers_[i];
    for (std::size_t j = 0; j < next.size(); ++j) {
      const double g = has_grad ? grads[i][j] : 0.0;
      m[j] = b1 * m[j] + (1.0 - b1) * g;
      v[j] = b2 * v[j] + (1.0 - b2) * g * g;
      next[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + options_.eps);
    }
    param.assign(next);
  }
}

}  // namespace sgada
