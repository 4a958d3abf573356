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

#include "sgada/ada.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "sgada/errors.hpp"
#include "sgada/ops.hpp"
#include "sgada/rng.hpp"

namespace sgada {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;

std::size_t category_index(AugmentCategory c) { return static_cast<std::size_t>(c); }

void check_images(const Tensor& images, const char* op) {
  if (images.rank() != 4 || images.dim(2) != images.dim(3)) {
    throw ShapeError(std::string(op) + ": expected square [N,C,R,R] images, got " +
                     shape_str(images.shape()));
  }
}

// Source pixel of output (y, x) under translate(rotate(flip(image))), or
// false when the translation pulls in zero fill.
bool source_pixel(const ImageAugmentation& a, std::ptrdiff_t r, std::ptrdiff_t y, std::ptrdiff_t x,
                  std::ptrdiff_t& sy, std::ptrdiff_t& sx) {
  y -= a.shift_y;
  x -= a.shift_x;
  if (y < 0 || y >= r || x < 0 || x >= r) return false;
  for (int k = 0; k < a.rotations; ++k) {
    const std::ptrdiff_t ny = x;
    const std::ptrdiff_t nx = r - 1 - y;
    y = ny;
    x = nx;
  }
  if (a.flip) x = r - 1 - x;
  sy = y;
  sx = x;
  return true;
}

bool is_geometric_identity(const ImageAugmentation& a) {
  return !a.flip && a.rotations == 0 && a.shift_x == 0 && a.shift_y == 0;
}

}  // namespace

ImageAugmentation sample_augmentation(double p, std::uint64_t seed, std::size_t index,
                                      std::size_t resolution) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError("augmentation probability must lie in [0, 1], got " + std::to_string(p));
  }
  ImageAugmentation a;
  for (std::size_t c = 0; c < kNumAugmentCategories; ++c) {
    a.applied[c] = uniform_at(seed, index, c, 0) < p;
  }
  auto draw = [&](AugmentCategory c, std::uint64_t j) {
    return uniform_at(seed, index, category_index(c), j);
  };
  if (a.applied[category_index(AugmentCategory::kXFlip)]) a.flip = true;
  if (a.applied[category_index(AugmentCategory::kRot90)]) {
    a.rotations = static_cast<int>(std::floor(draw(AugmentCategory::kRot90, 1) * 4.0));
  }
  if (a.applied[category_index(AugmentCategory::kTranslate)]) {
    const int m = static_cast<int>(std::floor(kTranslateFraction * static_cast<double>(resolution)));
    const double span = 2.0 * m + 1.0;
    a.shift_x = static_cast<int>(std::floor(draw(AugmentCategory::kTranslate, 1) * span)) - m;
    a.shift_y = static_cast<int>(std::floor(draw(AugmentCategory::kTranslate, 2) * span)) - m;
  }
  if (a.applied[category_index(AugmentCategory::kBrightness)]) {
    a.brightness = kBrightnessStd * normal_at(seed, index, category_index(AugmentCategory::kBrightness), 1);
  }
  if (a.applied[category_index(AugmentCategory::kContrast)]) {
    a.contrast =
        std::exp(kContrastLogStd * normal_at(seed, index, category_index(AugmentCategory::kContrast), 1));
  }
  if (a.applied[category_index(AugmentCategory::kNoise)]) {
    a.noise_key = hash_key(seed, index, kNoiseStream);
  }
  return a;
}

Tensor apply_augmentations(const Tensor& images, std::span<const ImageAugmentation> plan) {
  check_images(images, "apply_augmentations");
  const std::size_t n = images.dim(0);
  const std::size_t ch = images.dim(1);
  const std::size_t r = images.dim(2);
  if (plan.size() != n) {
    throw ShapeError("apply_augmentations: plan has " + std::to_string(plan.size()) +
                     " entries for " + std::to_string(n) + " images");
  }
  const std::size_t plane = r * r;
  const std::size_t per_image = ch * plane;
  Tensor x = images;

  bool geometric = false;
  bool bright = false;
  bool contrast = false;
  bool noise = false;
  for (const auto& a : plan) {
    geometric = geometric || !is_geometric_identity(a);
    bright = bright || a.applied[category_index(AugmentCategory::kBrightness)];
    contrast = contrast || a.applied[category_index(AugmentCategory::kContrast)];
    noise = noise || a.applied[category_index(AugmentCategory::kNoise)];
  }

  if (geometric) {
    auto map = std::make_shared<IndexMap>();
    map->in_shape = images.shape();
    map->out_shape = images.shape();
    map->index.resize(images.numel());
    const auto ri = static_cast<std::ptrdiff_t>(r);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::ptrdiff_t y = 0; y < ri; ++y) {
        for (std::ptrdiff_t xx = 0; xx < ri; ++xx) {
          std::ptrdiff_t sy = 0;
          std::ptrdiff_t sx = 0;
          const bool inside = source_pixel(plan[i], ri, y, xx, sy, sx);
          for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t out = i * per_image + c * plane + static_cast<std::size_t>(y * ri + xx);
            map->index[out] = inside ? static_cast<std::int64_t>(i * per_image + c * plane +
                                                                 static_cast<std::size_t>(sy * ri + sx))
                                     : -1;
          }
        }
      }
    }
    x = gather(x, std::move(map));
  }

  auto per_image_constant = [&](auto value_of) {
    std::vector<double> v(images.numel());
    for (std::size_t i = 0; i < n; ++i) {
      const double value = value_of(plan[i]);
      std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(i * per_image), per_image, value);
    }
    return Tensor::from_data(images.shape(), std::move(v));
  };
  if (bright) x = add(x, per_image_constant([](const ImageAugmentation& a) { return a.brightness; }));
  if (contrast) x = mul(x, per_image_constant([](const ImageAugmentation& a) { return a.contrast; }));
  if (noise) {
    std::vector<double> v(images.numel(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!plan[i].applied[category_index(AugmentCategory::kNoise)]) continue;
      for (std::size_t j = 0; j < per_image; ++j) {
        v[i * per_image + j] = kNoiseStd * normal_at(plan[i].noise_key, j);
      }
    }
    x = add(x, Tensor::from_data(images.shape(), std::move(v)));
  }
  return x;
}

Tensor augment_batch(const Tensor& images, double p, std::uint64_t seed) {
  check_images(images, "augment_batch");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError("augmentation probability must lie in [0, 1], got " + std::to_string(p));
  }
  if (p == 0.0) return images;
  std::vector<ImageAugmentation> plan;
  plan.reserve(images.dim(0));
  for (std::size_t i = 0; i < images.dim(0); ++i) {
    plan.push_back(sample_augmentation(p, seed, i, images.dim(2)));
  }
  return apply_augmentations(images, plan);
}

ScoreSummary summarize_scores(std::span<const double> train, std::span<const double> val,
                              std::span<const double> gen) {
  auto mean_of = [](std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  ScoreSummary s;
  s.e_train = mean_of(train);
  s.e_val = mean_of(val);
  s.e_gen = mean_of(gen);
  s.sign_mean_train = train.empty() ? 0.0 : heuristic_rt(train);
  return s;
}

double heuristic_rv(const ScoreSummary& s) {
  const double den = s.e_train - s.e_gen;
  if (!(std::abs(den) > kHeuristicDenominatorEpsilon)) {
    throw NumericError("heuristic_rv: degenerate denominator e_train - e_gen");
  }
  const double r = (s.e_train - s.e_val) / den;
  return std::clamp(r, 0.0, 1.0);
}

double heuristic_rt(std::span<const double> train_scores) {
  if (train_scores.empty()) throw ShapeError("heuristic_rt: empty score list");
  double acc = 0.0;
  for (double v : train_scores) acc += static_cast<double>((v > 0.0) - (v < 0.0));
  return acc / static_cast<double>(train_scores.size());
}

std::string_view to_string(ControlMode mode) { return mode == ControlMode::kRv ? "rv" : "rt"; }

ControlMode parse_control_mode(std::string_view text) {
  if (text == "rt") return ControlMode::kRt;
  if (text == "rv") return ControlMode::kRv;
  throw ConfigError("unknown ada mode '" + std::string(text) + "' (expected rt or rv)");
}

void ControllerConfig::validate() const {
  if (!(p_max >= 0.0 && p_max <= 1.0)) throw ConfigError("ada p_max must lie in [0, 1]");
  if (horizon_images <= 0) throw ConfigError("ada horizon must be positive");
  if (update_interval <= 0) throw ConfigError("ada update interval must be positive");
  if (!std::isfinite(target)) throw ConfigError("ada target must be finite");
}

double ControllerState::p() const noexcept {
  return std::min(config.p_max,
                  static_cast<double>(p_images) / static_cast<double>(config.horizon_images));
}

std::int64_t ControllerState::p_images_cap() const noexcept {
  return static_cast<std::int64_t>(
      std::ceil(config.p_max * static_cast<double>(config.horizon_images)));
}

ControllerState ControllerState::with_p(ControllerConfig config, double p) {
  config.validate();
  if (!(p >= 0.0 && p <= config.p_max)) throw ConfigError("initial p outside [0, p_max]");
  ControllerState s;
  s.config = config;
  s.p_images = std::llround(p * static_cast<double>(config.horizon_images));
  s.p_images = std::min(s.p_images, s.p_images_cap());
  return s;
}

ControllerState controller_step(const ControllerState& state, double heuristic_value,
                                std::int64_t images_in_batch) {
  if (!std::isfinite(heuristic_value)) {
    throw NumericError("controller_step: non-finite heuristic value");
  }
  ControllerState next = state;
  const double diff = heuristic_value - state.config.target;
  const std::int64_t direction = (diff > 0.0) - (diff < 0.0);
  next.p_images = std::clamp<std::int64_t>(state.p_images + direction * images_in_batch, 0,
                                           state.p_images_cap());
  next.images_seen_since_update = 0;
  return next;
}

}  // namespace sgada
