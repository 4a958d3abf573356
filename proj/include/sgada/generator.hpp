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

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sgada/params.hpp"
#include "sgada/tensor.hpp"

namespace sgada {

/// Architecture shared by the generator and the discriminator.
struct SynthesisConfig {
  std::size_t base_resolution = 4;
  std::size_t target_resolution = 32;
  /// Feature channels per resolution; must cover base..target.
  std::map<std::size_t, std::size_t> channels{{4, 64}, {8, 64}, {16, 32}, {32, 32}};
  std::size_t z_dim = 64;
  std::size_t w_dim = 64;
  std::size_t mapping_depth = 4;
  /// 1 for grayscale MRI; 3 would give RGB.
  std::size_t image_channels = 1;

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
  /// base, 2*base, ..., target.
  std::vector<std::size_t> resolutions() const;
  std::size_t channels_at(std::size_t resolution) const;
  /// Two modulated convolutions per resolution.
  std::size_t num_layers() const { return 2 * resolutions().size(); }
};

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kDemodEpsilon = 1e-8;

/// Explicit per-style effective weights: w'[o,i,k] = w[o,i,k] * s[i], then,
/// when `demodulate`, w''[o,i,k] = w'[o,i,k] / sqrt(sum_{i,k} w'[o,i,k]^2 + eps).
/// weights: [O,I,K,K], s: [I].
Tensor modulate_demodulate(const Tensor& weights, const Tensor& s, bool demodulate);

/// Batched modulated convolution: equals conv2d with modulate_demodulate
/// weights per sample, computed with shared weights by scaling the input
/// channels by s and the output channels by the demodulation factor.
/// x: [N,I,H,W], s: [N,I].
Tensor modulated_conv2d(const Tensor& x, const Tensor& weights, const Tensor& s, bool demodulate);

/// Layers < crossover take w_a, the rest take w_b.
std::vector<Tensor> style_mix(const Tensor& w_a, const Tensor& w_b, std::size_t crossover,
                              std::size_t layer_count);

/// Style-based generator: mapping network, per-layer affine styles,
/// modulated/demodulated convolutions with external noise and bias, and
/// per-resolution output projections summed through upsampled skips.
class Generator {
 public:
  Generator(SynthesisConfig config, std::uint64_t seed);

  const SynthesisConfig& config() const noexcept { return config_; }
  std::size_t num_layers() const noexcept { return convs_.size(); }
  /// Input channel count of modulated layer `layer`.
  std::size_t layer_in_channels(std::size_t layer) const;

  /// z: [N, z_dim] -> w: [N, w_dim]. Each z row is scaled to unit RMS first.
  Tensor map_latent(const Tensor& z) const;

  /// s = A_layer w + b_layer, [N, in_channels(layer)].
  Tensor style_affine(const Tensor& w, std::size_t layer) const;

  /// One w per layer (each [N, w_dim]) -> image [N, image_channels, R, R].
  Tensor synthesize(std::span<const Tensor> w_per_layer, std::uint64_t noise_seed) const;

  /// Same w for every layer.
  Tensor synthesize(const Tensor& w, std::uint64_t noise_seed) const;

  /// Per-layer noise input [N,1,H,W] for the given seed.
  Tensor layer_noise(std::size_t layer, std::size_t batch, std::uint64_t noise_seed) const;

  ParamList parameters() const;
  /// Parameters whose name contains "noise_strength".
  std::vector<Tensor> noise_strengths() const;

 private:
  struct Affine {
    Tensor weight;  // [w_dim, channels]
    Tensor bias;    // [channels]
  };
  struct ConvLayer {
    std::string name;
    std::size_t resolution;
    Tensor weight;  // [O, I, 3, 3]
    Affine affine;
    Tensor noise_strength;  // [1]
    Tensor bias;            // [O]
  };
  struct OutputLayer {
    std::string name;
    Tensor weight;  // [image_channels, C, 1, 1]
    Affine affine;
    Tensor bias;  // [image_channels]
  };
  struct Dense {
    std::string name;
    Tensor weight;  // [in, out]
    Tensor bias;    // [out]
  };

  Tensor apply_conv(const ConvLayer& layer, std::size_t index, const Tensor& x, const Tensor& w,
                    std::uint64_t noise_seed) const;

  SynthesisConfig config_;
  std::vector<Dense> mapping_;
  Tensor constant_input_;  // [1, C_base, base, base]
  std::vector<ConvLayer> convs_;
  std::vector<OutputLayer> outputs_;  // one per resolution
};

}  // namespace sgada
