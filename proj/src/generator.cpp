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

#include "sgada/generator.hpp"

#include <cmath>
#include <string>

#include "sgada/errors.hpp"
#include "sgada/ops.hpp"
#include "sgada/rng.hpp"

namespace sgada {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Rows scaled to unit root-mean-square. The tiny offset only keeps the
// all-zero row finite; it is far below rounding for any nonzero row.
Tensor normalize_rows(const Tensor& z) {
  const std::size_t n = z.dim(0), d = z.dim(1);
  const Tensor ms = scale(sum_rows(square(z)), 1.0 / static_cast<double>(d));
  const Tensor inv = pow_scalar(add_scalar(ms, 1e-300), -0.5);
  return mul(z, broadcast_to(reshape(inv, {n, 1}), z.shape()));
}

}  // namespace

void SynthesisConfig::validate() const {
  if (base_resolution != 4) throw ConfigError("base_resolution must be 4");
  if (!is_power_of_two(target_resolution) || target_resolution < 16) {
    throw ConfigError("target_resolution must be a power of two >= 16, got " +
                      std::to_string(target_resolution));
  }
  if (z_dim == 0 || w_dim == 0 || mapping_depth == 0 || image_channels == 0) {
    throw ConfigError("z_dim, w_dim, mapping_depth and image_channels must be positive");
  }
  for (std::size_t r : resolutions()) {
    auto it = channels.find(r);
    if (it == channels.end() || it->second == 0) {
      throw ConfigError("missing or zero channel count for resolution " + std::to_string(r));
    }
  }
}

std::vector<std::size_t> SynthesisConfig::resolutions() const {
  std::vector<std::size_t> out;
  for (std::size_t r = base_resolution; r <= target_resolution; r *= 2) out.push_back(r);
  return out;
}

std::size_t SynthesisConfig::channels_at(std::size_t resolution) const {
  auto it = channels.find(resolution);
  if (it == channels.end()) {
    throw ConfigError("no channel count for resolution " + std::to_string(resolution));
  }
  return it->second;
}

Tensor modulate_demodulate(const Tensor& weights, const Tensor& s, bool demodulate) {
  if (weights.rank() != 4 || s.rank() != 1 || s.dim(0) != weights.dim(1)) {
    throw ShapeError("modulate_demodulate: style " + shape_str(s.shape()) +
                     " does not match weights " + shape_str(weights.shape()));
  }
  const Shape& ws = weights.shape();
  const Tensor modulated = mul(weights, broadcast_to(reshape(s, {1, ws[1], 1, 1}), ws));
  if (!demodulate) return modulated;
  const Tensor norms2 = sum_to(square(modulated), {ws[0], 1, 1, 1});
  const Tensor inv = pow_scalar(add_scalar(norms2, kDemodEpsilon), -0.5);
  return mul(modulated, broadcast_to(inv, ws));
}

Tensor modulated_conv2d(const Tensor& x, const Tensor& weights, const Tensor& s, bool demodulate) {
  const std::size_t n = x.dim(0);
  const std::size_t out_ch = weights.dim(0), in_ch = weights.dim(1);
  if (s.shape() != Shape{n, in_ch}) {
    throw ShapeError("modulated_conv2d: style " + shape_str(s.shape()) + " does not match input " +
                     shape_str(x.shape()));
  }
  Tensor y = conv2d(scale_channels(x, s), weights);
  if (!demodulate) return y;
  // sum_{i,k} (w[o,i,k] s[n,i])^2 = sum_i s[n,i]^2 * sum_k w[o,i,k]^2
  const Tensor wsq = reshape(sum_to(square(weights), {out_ch, in_ch, 1, 1}), {out_ch, in_ch});
  const Tensor energy = matmul(square(s), transpose(wsq));  // [N, O]
  const Tensor demod = pow_scalar(add_scalar(energy, kDemodEpsilon), -0.5);
  return scale_channels(y, demod);
}

std::vector<Tensor> style_mix(const Tensor& w_a, const Tensor& w_b, std::size_t crossover,
                              std::size_t layer_count) {
  if (crossover > layer_count) {
    throw ConfigError("style_mix: crossover " + std::to_string(crossover) + " exceeds layer count " +
                      std::to_string(layer_count));
  }
  if (w_a.shape() != w_b.shape()) throw ShapeError("style_mix: style shapes differ");
  std::vector<Tensor> out;
  out.reserve(layer_count);
  for (std::size_t i = 0; i < layer_count; ++i) out.push_back(i < crossover ? w_a : w_b);
  return out;
}

Generator::Generator(SynthesisConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const auto& cfg = config_;

  std::size_t in = cfg.z_dim;
  for (std::size_t i = 0; i < cfg.mapping_depth; ++i) {
    const std::string name = "mapping." + std::to_string(i);
    Dense layer{name, init_normal(seed, name + ".weight", {in, cfg.w_dim}, 1.0 / std::sqrt(double(in))),
                init_constant({cfg.w_dim}, 0.0)};
    mapping_.push_back(std::move(layer));
    in = cfg.w_dim;
  }

  const std::size_t base = cfg.base_resolution;
  constant_input_ =
      init_normal(seed, "synthesis.const", {1, cfg.channels_at(base), base, base}, 1.0);

  auto make_affine = [&](const std::string& prefix, std::size_t channels) {
    return Affine{init_normal(seed, prefix + ".affine.weight", {cfg.w_dim, channels},
                              1.0 / std::sqrt(double(cfg.w_dim))),
                  init_constant({channels}, 1.0)};
  };

  std::size_t prev_ch = cfg.channels_at(base);
  for (std::size_t r : cfg.resolutions()) {
    const std::size_t ch = cfg.channels_at(r);
    for (int k = 0; k < 2; ++k) {
      const std::size_t in_ch = k == 0 ? prev_ch : ch;
      const std::string name = "synthesis.b" + std::to_string(r) + ".conv" + std::to_string(k);
      ConvLayer layer;
      layer.name = name;
      layer.resolution = r;
      layer.weight = init_normal(seed, name + ".weight", {ch, in_ch, 3, 3},
                                 1.0 / std::sqrt(double(in_ch * 9)));
      layer.affine = make_affine(name, in_ch);
      layer.noise_strength = init_constant({1}, 0.0);
      layer.bias = init_constant({ch}, 0.0);
      convs_.push_back(std::move(layer));
    }
    const std::string name = "synthesis.b" + std::to_string(r) + ".torgb";
    OutputLayer out;
    out.name = name;
    out.weight = init_normal(seed, name + ".weight", {cfg.image_channels, ch, 1, 1},
                             1.0 / std::sqrt(double(ch)));
    out.affine = make_affine(name, ch);
    out.bias = init_constant({cfg.image_channels}, 0.0);
    outputs_.push_back(std::move(out));
    prev_ch = ch;
  }
}

std::size_t Generator::layer_in_channels(std::size_t layer) const {
  if (layer >= convs_.size()) throw ConfigError("layer index out of range");
  return convs_[layer].weight.dim(1);
}

Tensor Generator::map_latent(const Tensor& z) const {
  if (z.rank() != 2 || z.dim(1) != config_.z_dim) {
    throw ShapeError("map_latent: expected [N," + std::to_string(config_.z_dim) + "], got " +
                     shape_str(z.shape()));
  }
  Tensor x = normalize_rows(z);
  for (const Dense& layer : mapping_) {
    x = leaky_relu(bias_add(matmul(x, layer.weight), layer.bias), kLeakySlope);
  }
  return x;
}

Tensor Generator::style_affine(const Tensor& w, std::size_t layer) const {
  if (layer >= convs_.size()) throw ConfigError("style_affine: layer index out of range");
  if (w.rank() != 2 || w.dim(1) != config_.w_dim) {
    throw ShapeError("style_affine: expected [N," + std::to_string(config_.w_dim) + "], got " +
                     shape_str(w.shape()));
  }
  const Affine& a = convs_[layer].affine;
  return bias_add(matmul(w, a.weight), a.bias);
}

Tensor Generator::layer_noise(std::size_t layer, std::size_t batch, std::uint64_t noise_seed) const {
  const std::size_t r = convs_.at(layer).resolution;
  std::vector<double> values(batch * r * r);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = normal_at(noise_seed, layer, i);
  return Tensor::from_data({batch, 1, r, r}, std::move(values));
}

Tensor Generator::apply_conv(const ConvLayer& layer, std::size_t index, const Tensor& x,
                             const Tensor& w, std::uint64_t noise_seed) const {
  const Tensor s = style_affine(w, index);
  Tensor y = modulated_conv2d(x, layer.weight, s, /*demodulate=*/true);
  const Tensor noise = layer_noise(index, x.dim(0), noise_seed);
  const Tensor scaled_noise =
      mul(noise, broadcast_to(reshape(layer.noise_strength, {1, 1, 1, 1}), noise.shape()));
  y = add(y, broadcast_to(scaled_noise, y.shape()));
  y = bias_add(y, layer.bias);
  return leaky_relu(y, kLeakySlope);
}

Tensor Generator::synthesize(std::span<const Tensor> w_per_layer, std::uint64_t noise_seed) const {
  if (w_per_layer.size() != convs_.size()) {
    throw ConfigError("synthesize: expected " + std::to_string(convs_.size()) +
                      " style vectors, got " + std::to_string(w_per_layer.size()));
  }
  const std::size_t n = w_per_layer.front().dim(0);
  for (const Tensor& w : w_per_layer) {
    if (w.rank() != 2 || w.dim(0) != n || w.dim(1) != config_.w_dim) {
      throw ShapeError("synthesize: style vectors must all be [N," +
                       std::to_string(config_.w_dim) + "]");
    }
  }
  const Shape& cs = constant_input_.shape();
  Tensor x = broadcast_to(constant_input_, {n, cs[1], cs[2], cs[3]});
  Tensor image;
  for (std::size_t level = 0; level < outputs_.size(); ++level) {
    const std::size_t first = 2 * level;
    if (level > 0) x = upsample2x_nearest(x);
    x = apply_conv(convs_[first], first, x, w_per_layer[first], noise_seed);
    x = apply_conv(convs_[first + 1], first + 1, x, w_per_layer[first + 1], noise_seed);

    const OutputLayer& out = outputs_[level];
    const Tensor& w_out = w_per_layer[first + 1];
    const Tensor s = bias_add(matmul(w_out, out.affine.weight), out.affine.bias);
    const Tensor rgb = bias_add(modulated_conv2d(x, out.weight, s, /*demodulate=*/false), out.bias);
    image = image.defined() ? add(upsample2x_nearest(image), rgb) : rgb;
  }
  return image;
}

Tensor Generator::synthesize(const Tensor& w, std::uint64_t noise_seed) const {
  const std::vector<Tensor> ws(convs_.size(), w);
  return synthesize(ws, noise_seed);
}

ParamList Generator::parameters() const {
  ParamList out;
  for (const Dense& d : mapping_) {
    out.push_back({d.name + ".weight", d.weight});
    out.push_back({d.name + ".bias", d.bias});
  }
  out.push_back({"synthesis.const", constant_input_});
  std::size_t level = 0;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const ConvLayer& c = convs_[i];
    out.push_back({c.name + ".weight", c.weight});
    out.push_back({c.name + ".affine.weight", c.affine.weight});
    out.push_back({c.name + ".affine.bias", c.affine.bias});
    out.push_back({c.name + ".noise_strength", c.noise_strength});
    out.push_back({c.name + ".bias", c.bias});
    if (i % 2 == 1) {
      const OutputLayer& o = outputs_[level++];
      out.push_back({o.name + ".weight", o.weight});
      out.push_back({o.name + ".affine.weight", o.affine.weight});
      out.push_back({o.name + ".affine.bias", o.affine.bias});
      out.push_back({o.name + ".bias", o.bias});
    }
  }
  return out;
}

std::vector<Tensor> Generator::noise_strengths() const {
  std::vector<Tensor> out;
  for (const ConvLayer& c : convs_) out.push_back(c.noise_strength);
  return out;
}

}  // namespace sgada
