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

#include "sgada/discriminator.hpp"

#include <cmath>
#include <numbers>

#include "sgada/errors.hpp"
#include "sgada/ops.hpp"

namespace sgada {

namespace {

double he_std(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

Discriminator::Discriminator(SynthesisConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  const std::size_t top = config_.target_resolution;
  const std::size_t top_ch = config_.channels_at(top);
  const std::size_t img_ch = config_.image_channels;

  input_name_ = "disc.fromrgb" + std::to_string(top);
  input_weight_ = init_normal(seed, input_name_ + ".weight", {top_ch, img_ch, 1, 1}, he_std(img_ch));
  input_bias_ = init_constant({top_ch}, 0.0);

  for (std::size_t r = top; r > config_.base_resolution; r /= 2) {
    const std::size_t ch = config_.channels_at(r);
    const std::size_t next = config_.channels_at(r / 2);
    Block b;
    b.name = "disc.b" + std::to_string(r);
    b.conv0_weight = init_normal(seed, b.name + ".conv0.weight", {ch, ch, 3, 3}, he_std(ch * 9));
    b.conv0_bias = init_constant({ch}, 0.0);
    b.conv1_weight = init_normal(seed, b.name + ".conv1.weight", {next, ch, 3, 3}, he_std(ch * 9));
    b.conv1_bias = init_constant({next}, 0.0);
    b.skip_weight = init_normal(seed, b.name + ".skip.weight", {next, ch, 1, 1}, he_std(ch));
    blocks_.push_back(std::move(b));
  }

  const std::size_t base = config_.base_resolution;
  const std::size_t base_ch = config_.channels_at(base);
  final_conv_weight_ =
      init_normal(seed, "disc.epilogue.conv.weight", {base_ch, base_ch, 3, 3}, he_std(base_ch * 9));
  final_conv_bias_ = init_constant({base_ch}, 0.0);
  const std::size_t flat = base_ch * base * base;
  fc_weight_ = init_normal(seed, "disc.epilogue.fc.weight", {flat, base_ch}, he_std(flat));
  fc_bias_ = init_constant({base_ch}, 0.0);
  out_weight_ = init_normal(seed, "disc.epilogue.out.weight", {base_ch, 1}, he_std(base_ch));
  out_bias_ = init_constant({1}, 0.0);
}

Tensor Discriminator::block_forward(std::size_t index, const Tensor& x) const {
  const Block& b = blocks_.at(index);
  Tensor main = leaky_relu(bias_add(conv2d(x, b.conv0_weight), b.conv0_bias), kLeakySlope);
  main = leaky_relu(bias_add(conv2d(main, b.conv1_weight), b.conv1_bias), kLeakySlope);
  main = downsample2x_mean(main);
  const Tensor skip = conv2d(downsample2x_mean(x), b.skip_weight);
  return scale(add(main, skip), 1.0 / std::numbers::sqrt2);
}

Tensor Discriminator::score(const Tensor& images) const {
  const std::size_t r = config_.target_resolution;
  if (images.rank() != 4 || images.dim(1) != config_.image_channels || images.dim(2) != r ||
      images.dim(3) != r) {
    throw ShapeError("Discriminator::score: expected [N," + std::to_string(config_.image_channels) +
                     "," + std::to_string(r) + "," + std::to_string(r) + "], got " +
                     shape_str(images.shape()));
  }
  const std::size_t n = images.dim(0);
  Tensor x = leaky_relu(bias_add(conv2d(images, input_weight_), input_bias_), kLeakySlope);
  for (std::size_t i = 0; i < blocks_.size(); ++i) x = block_forward(i, x);
  x = leaky_relu(bias_add(conv2d(x, final_conv_weight_), final_conv_bias_), kLeakySlope);
  x = reshape(x, {n, x.numel() / n});
  x = leaky_relu(bias_add(matmul(x, fc_weight_), fc_bias_), kLeakySlope);
  x = bias_add(matmul(x, out_weight_), out_bias_);
  return reshape(x, {n});
}

ParamList Discriminator::parameters() const {
  ParamList out;
  out.push_back({input_name_ + ".weight", input_weight_});
  out.push_back({input_name_ + ".bias", input_bias_});
  for (const Block& b : blocks_) {
    out.push_back({b.name + ".conv0.weight", b.conv0_weight});
    out.push_back({b.name + ".conv0.bias", b.conv0_bias});
    out.push_back({b.name + ".conv1.weight", b.conv1_weight});
    out.push_back({b.name + ".conv1.bias", b.conv1_bias});
    out.push_back({b.name + ".skip.weight", b.skip_weight});
  }
  out.push_back({"disc.epilogue.conv.weight", final_conv_weight_});
  out.push_back({"disc.epilogue.conv.bias", final_conv_bias_});
  out.push_back({"disc.epilogue.fc.weight", fc_weight_});
  out.push_back({"disc.epilogue.fc.bias", fc_bias_});
  out.push_back({"disc.epilogue.out.weight", out_weight_});
  out.push_back({"disc.epilogue.out.bias", out_bias_});
  return out;
}

}  // namespace sgada
