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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sgada/tensor.hpp"

namespace sgada {

/// Augmentation categories in application order.
enum class AugmentCategory : std::uint8_t {
  kXFlip = 0,
  kRot90 = 1,
  kTranslate = 2,
  kBrightness = 3,
  kContrast = 4,
  kNoise = 5,
};
inline constexpr std::size_t kNumAugmentCategories = 6;

inline constexpr double kBrightnessStd = 0.2;
inline constexpr double kContrastLogStd = 0.5;
inline constexpr double kNoiseStd = 0.1;
inline constexpr double kTranslateFraction = 0.125;

/// Concrete transform drawn for one image. Fields of categories that were
/// not selected hold their identity values.
struct ImageAugmentation {
  std::array<bool, kNumAugmentCategories> applied{};
  bool flip = false;
  int rotations = 0;  // counter-clockwise quarter turns, 0..3
  int shift_x = 0;
  int shift_y = 0;
  double brightness = 0.0;
  double contrast = 1.0;
  /// Key of the per-pixel noise stream; used only when kNoise is applied.
  std::uint64_t noise_key = 0;
};

/// Draws the transform of image `index` from the stream keyed by `seed`.
ImageAugmentation sample_augmentation(double p, std::uint64_t seed, std::size_t index,
                                      std::size_t resolution);

/// Applies fixed per-image transforms to [N, C, R, R] images. Geometric
/// transforms are a single gather, so gradients route through the inverse
/// index mapping and zero-filled pixels receive no gradient.
Tensor apply_augmentations(const Tensor& images, std::span<const ImageAugmentation> plan);

/// Seeded stochastic augmentation with strength p in [0, 1]. p == 0 returns
/// the input unchanged.
Tensor augment_batch(const Tensor& images, double p, std::uint64_t seed);

/// Discriminator statistics feeding the overfitting heuristics.
struct ScoreSummary {
  double e_train = 0.0;
  double e_val = 0.0;
  double e_gen = 0.0;
  double sign_mean_train = 0.0;
};

ScoreSummary summarize_scores(std::span<const double> train, std::span<const double> val,
                              std::span<const double> gen);

inline constexpr double kHeuristicDenominatorEpsilon = 1e-12;

/// (e_train - e_val) / (e_train - e_gen), clamped to [0, 1]. Throws
/// NumericError when |e_train - e_gen| <= kHeuristicDenominatorEpsilon.
double heuristic_rv(const ScoreSummary& s);

/// Mean of sign(score) with sign(0) = 0. Throws ShapeError on empty input.
double heuristic_rt(std::span<const double> train_scores);

enum class ControlMode : std::uint8_t { kRt = 0, kRv = 1 };

std::string_view to_string(ControlMode mode);
/// "rt" or "rv"; throws ConfigError otherwise.
ControlMode parse_control_mode(std::string_view text);

struct ControllerConfig {
  double target = 0.6;
  ControlMode mode = ControlMode::kRt;
  std::int64_t horizon_images = 100000;
  double p_max = 0.85;
  /// Training iterations between heuristic evaluations.
  std::int64_t update_interval = 4;

  void validate() const;

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

/// Strength is tracked in whole images so repeated steps accumulate exactly:
/// p = min(p_max, p_images / horizon_images).
struct ControllerState {
  ControllerConfig config;
  std::int64_t p_images = 0;
  std::int64_t images_seen_since_update = 0;

  double p() const noexcept;
  /// Largest admissible p_images, the first count whose p reaches p_max.
  std::int64_t p_images_cap() const noexcept;

  static ControllerState with_p(ControllerConfig config, double p);

  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

/// Moves p by sign(h - target) * images / horizon within [0, p_max].
/// Throws NumericError when h is not finite.
ControllerState controller_step(const ControllerState& state, double heuristic_value,
                                std::int64_t images_in_batch);

}  // namespace sgada
