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
#include <string_view>
#include <vector>

#include "sgada/params.hpp"
#include "sgada/tensor.hpp"

namespace sgada {

struct AdamOptions {
  double lr = 2e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// Per-tensor step scale that makes a plain parameter follow the trajectory
/// of a unit-variance parameter rescaled by 1/sqrt(fan_in) at run time.
/// Weights get 1/sqrt(fan_in); every "mapping." tensor is further scaled by
/// `mapping_mult`; all others get 1.
double equalized_lr_multiplier(std::string_view name, const Shape& shape, double mapping_mult);

/// Adam with bias correction over a fixed parameter list. Moments are kept
/// in parameter order and exposed for checkpointing.
class Adam {
 public:
  Adam(ParamList params, AdamOptions options, std::vector<double> lr_multipliers);

  /// grads[i] pairs with params[i]; undefined entries count as zero.
  void step(const std::vector<Tensor>& grads);

  const ParamList& params() const noexcept { return params_; }
  std::vector<Tensor> tensors() const;
  std::int64_t steps() const noexcept { return steps_; }

  std::vector<std::vector<double>>& first_moments() noexcept { return m_; }
  std::vector<std::vector<double>>& second_moments() noexcept { return v_; }
  const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }
  void set_steps(std::int64_t steps) noexcept { steps_ = steps; }

 private:
  ParamList params_;
  AdamOptions options_;
  std::vector<double> multipliers_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t steps_ = 0;
};

}  // namespace sgada
