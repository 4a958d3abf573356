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

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sgada/linalg.hpp"
#include "sgada/tensor.hpp"

namespace sgada {

/// One feature vector per row.
using Features = Eigen::MatrixXd;

enum class EmbedderKind : std::uint8_t { kPixels = 0, kRandConv = 1 };

/// Deterministic stand-in feature extractor.
///
/// kPixels halves the image by 2x2 means down to 8x8 and flattens it
/// (64 features per channel). kRandConv runs three fixed, seeded 3x3
/// convolution layers and averages the final 128 maps over space.
struct Embedder {
  EmbedderKind kind = EmbedderKind::kPixels;
  std::uint64_t seed = 0;

  std::string name() const;
  std::size_t dim(std::size_t image_channels) const;
};

/// "pixels" or "randconv"; throws ConfigError otherwise.
EmbedderKind parse_embedder(std::string_view text);

/// images [N, C, R, R] -> features [N, d]. No gradients are recorded.
Features embed(const Tensor& images, const Embedder& embedder);

struct GaussianMoments {
  Eigen::VectorXd mu;
  SpdMatrix sigma;
  std::size_t n = 0;
};

/// Sample mean and unbiased covariance. Throws DataError for fewer than two
/// rows.
GaussianMoments gaussian_moments(const Features& features);

/// |mu_r - mu_g|^2 + tr(S_r + S_g - 2 (S_r S_g)^{1/2}), clamped below at 0.
double fid(const GaussianMoments& r, const GaussianMoments& g);

/// (<x, y> / d + 1)^3.
double poly_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Unbiased squared MMD of two equally sized samples under poly_kernel.
double mmd2_unbiased(const Features& x, const Features& y);

struct KidOptions {
  std::size_t block_size = 100;
  std::size_t n_blocks = 10;
  std::uint64_t seed = 0;
};

/// Rows drawn for one side (0 real, 1 generated) of block `block`: the
/// first m entries of a seeded partial Fisher-Yates shuffle of 0..rows-1.
std::vector<std::size_t> kid_subsample(std::size_t rows, std::size_t m, std::uint64_t seed,
                                       std::size_t block, std::size_t side);

/// One unbiased MMD^2 per block, each over `block_size` rows drawn without
/// replacement from either side.
std::vector<double> kid_blocks(const Features& real, const Features& gen, const KidOptions& options);

/// Mean of kid_blocks, unclamped.
double kid(const Features& real, const Features& gen, const KidOptions& options = {});

/// Feature file: "FEAT", u16 version, u64 count, u32 dim, count*dim f64.
void write_features(const std::filesystem::path& path, const Features& features);
Features read_features(const std::filesystem::path& path);

struct MetricRow {
  std::int64_t tick = 0;
  double fid = 0.0;
  double kid = 0.0;
  std::string embedder;
  std::size_t n_real = 0;
  std::size_t n_gen = 0;

  static std::string csv_header();
  std::string to_csv() const;
};

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace sgada
