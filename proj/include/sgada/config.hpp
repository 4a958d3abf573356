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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sgada/ada.hpp"
#include "sgada/generator.hpp"
#include "sgada/metrics.hpp"

namespace sgada {

/// Every setting of a run. The text form is one `key = value` per line in
/// declaration order; '#' starts a comment. A run is a pure function of its
/// configuration and dataset.
struct TrainConfig {
  // Data and architecture.
  std::string data;
  std::int64_t resolution = 32;
  std::string channels = "4:64,8:64,16:32,32:32";
  std::int64_t z_dim = 64;
  std::int64_t w_dim = 64;
  std::int64_t mapping_depth = 4;
  double val_frac = 0.1;

  // Schedule, in thousands of real images shown to the critic.
  std::int64_t batch_size = 16;
  double total_kimg = 50.0;
  double tick_kimg = 1.0;
  std::int64_t snapshot_every_ticks = 10;
  std::int64_t seed = 0;

  // Optimizer.
  double lr_g = 2e-3;
  double lr_d = 2e-3;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  double mapping_lr_mult = 0.01;

  // Regularization.
  double r1_gamma = 1.0;
  std::int64_t r1_interval = 16;
  double pl_weight = 2.0;
  std::int64_t pl_interval = 16;
  double pl_decay = 0.99;
  std::int64_t pl_batch_shrink = 2;
  double style_mixing_prob = 0.9;

  // Augmentation: "ada" adapts p, "fixed" holds ada_initial_p, "off" uses 0.
  std::string augment = "ada";
  std::string ada_mode = "rt";
  double ada_target = 0.6;
  std::int64_t ada_horizon = 100000;
  double ada_p_max = 0.85;
  std::int64_t ada_interval = 4;
  double ada_initial_p = 0.0;

  // Evaluation.
  std::string embedder = "pixels";
  std::int64_t embedder_seed = 0;
  std::int64_t n_gen = 500;
  std::int64_t kid_block_size = 100;
  std::int64_t kid_blocks = 10;

  // Transfer source checkpoint; empty for a fresh start.
  std::string transfer_from;

  /// Sets one key from its text value. Throws ConfigError for unknown keys
  /// and unparsable values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static std::vector<std::string> keys();

  /// Applies `key = value` lines on top of the current values.
  void merge_text(std::string_view text);
  void merge_file(const std::filesystem::path& path);
  static TrainConfig from_text(std::string_view text);

  /// Canonical text: every key, in declaration order.
  std::string to_text() const;
  std::uint64_t digest() const;

  void validate() const;

  SynthesisConfig synthesis(std::size_t image_channels = 1) const;
  ControllerConfig controller() const;
  Embedder metric_embedder() const;
  KidOptions kid_options(std::uint64_t seed) const;

  std::int64_t total_images() const;
  std::int64_t tick_images() const;
};

/// "4:64,8:64" -> {{4, 64}, {8, 64}}. Throws ConfigError when malformed.
std::map<std::size_t, std::size_t> parse_channel_map(std::string_view text);

}  // namespace sgada
