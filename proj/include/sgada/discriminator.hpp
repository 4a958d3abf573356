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
#include <string>
#include <vector>

#include "sgada/generator.hpp"
#include "sgada/params.hpp"
#include "sgada/tensor.hpp"

namespace sgada {

/// Residual critic. Images [N, C, R, R] in [-1, 1] map to one score each.
///
/// Layout: 1x1 input projection at full resolution, then one residual block
/// per halving down to 4x4 (main: conv3x3, conv3x3, downsample; skip:
/// downsample, conv1x1; merged as (main + skip) / sqrt(2)), then a 3x3 conv
/// and two dense layers. The network itself applies no augmentation.
class Discriminator {
 public:
  Discriminator(SynthesisConfig config, std::uint64_t seed);

  const SynthesisConfig& config() const noexcept { return config_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }

  /// [N, image_channels, R, R] -> [N].
  Tensor score(const Tensor& images) const;

  /// Residual block `index` (0 = full resolution) applied to its input.
  Tensor block_forward(std::size_t index, const Tensor& x) const;

  ParamList parameters() const;

 private:
  struct Block {
    std::string name;
    Tensor conv0_weight, conv0_bias;
    Tensor conv1_weight, conv1_bias;
    Tensor skip_weight;
  };

  SynthesisConfig config_;
  std::string input_name_;
  Tensor input_weight_, input_bias_;
  std::vector<Block> blocks_;
  Tensor final_conv_weight_, final_conv_bias_;
  Tensor fc_weight_, fc_bias_;
  Tensor out_weight_, out_bias_;
};

}  // namespace sgada
