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

#include "sgada/metrics.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "sgada/binary_io.hpp"
#include "sgada/errors.hpp"
#include "sgada/ops.hpp"
#include "sgada/rng.hpp"

namespace sgada {

namespace {

constexpr std::uint16_t kFeatureVersion = 1;
constexpr std::size_t kEmbedChunk = 64;
constexpr std::size_t kPixelGrid = 8;
constexpr std::size_t kRandConvWidths[3] = {16, 32, 128};

Tensor randconv_weight(std::uint64_t seed, std::size_t layer, std::size_t out, std::size_t in) {
  std::vector<double> v(out * in * 9);
  const double std = 1.0 / std::sqrt(static_cast<double>(in * 9));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std * normal_at(seed, layer, i);
  return Tensor::from_data({out, in, 3, 3}, std::move(v));
}

Tensor embed_chunk(const Tensor& x, const Embedder& e) {
  const std::size_t n = x.dim(0);
  if (e.kind == EmbedderKind::kPixels) {
    Tensor y = x;
    while (y.dim(2) > kPixelGrid) y = downsample2x_mean(y);
    return reshape(y, {n, y.numel() / n});
  }
  Tensor y = x;
  std::size_t in = x.dim(1);
  for (std::size_t layer = 0; layer < 3; ++layer) {
    const std::size_t out = kRandConvWidths[layer];
    y = leaky_relu(conv2d(y, randconv_weight(e.seed, layer, out, in)), 0.2);
    if (layer < 2 && y.dim(2) >= 2 && y.dim(2) % 2 == 0) y = downsample2x_mean(y);
    in = out;
  }
  const std::size_t spatial = y.dim(2) * y.dim(3);
  y = reshape(y, {n * in, spatial});
  return scale(reshape(sum_rows(y), {n, in}), 1.0 / static_cast<double>(spatial));
}

}  // namespace

std::string Embedder::name() const { return kind == EmbedderKind::kPixels ? "pixels" : "randconv"; }

std::size_t Embedder::dim(std::size_t image_channels) const {
  return kind == EmbedderKind::kPixels ? kPixelGrid * kPixelGrid * image_channels
                                       : kRandConvWidths[2];
}

EmbedderKind parse_embedder(std::string_view text) {
  if (text == "pixels") return EmbedderKind::kPixels;
  if (text == "randconv") return EmbedderKind::kRandConv;
  throw ConfigError("unknown embedder '" + std::string(text) + "' (expected pixels or randconv)");
}

Features embed(const Tensor& images, const Embedder& embedder) {
  if (images.rank() != 4 || images.dim(2) != images.dim(3)) {
    throw ShapeError("embed: expected square [N,C,R,R] images, got " + shape_str(images.shape()));
  }
  const std::size_t r = images.dim(2);
  if (embedder.kind == EmbedderKind::kPixels) {
    if (r < kPixelGrid || (r & (r - 1)) != 0) {
      throw ShapeError("embed: pixels embedder needs a power-of-two resolution >= 8, got " +
                       std::to_string(r));
    }
  }
  NoGradGuard no_grad;
  const std::size_t n = images.dim(0);
  const std::size_t per_image = images.numel() / std::max<std::size_t>(n, 1);
  const std::size_t d = embedder.dim(images.dim(1));
  Features out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const auto all = images.data();
  for (std::size_t start = 0; start < n; start += kEmbedChunk) {
    const std::size_t count = std::min(kEmbedChunk, n - start);
    Shape shape = images.shape();
    shape[0] = count;
    std::vector<double> chunk(all.begin() + static_cast<std::ptrdiff_t>(start * per_image),
                              all.begin() + static_cast<std::ptrdiff_t>((start + count) * per_image));
    const Tensor f = embed_chunk(Tensor::from_data(shape, std::move(chunk)), embedder);
    const auto v = f.data();
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        out(static_cast<Eigen::Index>(start + i), static_cast<Eigen::Index>(j)) = v[i * d + j];
      }
    }
  }
  return out;
}

GaussianMoments gaussian_moments(const Features& features) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw DataError("gaussian_moments: need at least 2 samples, got " + std::to_string(n));
  GaussianMoments m;
  m.n = static_cast<std::size_t>(n);
  m.mu = features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = features.rowwise() - m.mu.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  m.sigma = SpdMatrix(std::move(cov));
  return m;
}

double fid(const GaussianMoments& r, const GaussianMoments& g) {
  if (r.mu.size() != g.mu.size() || r.sigma.dim() != g.sigma.dim() ||
      r.sigma.dim() != r.mu.size()) {
    throw ShapeError("fid: moment dimensions differ");
  }
  const double mean_term = (r.mu - g.mu).squaredNorm();
  const double value = mean_term + r.sigma.matrix().trace() + g.sigma.matrix().trace() -
                       2.0 * trace_sqrt_product(r.sigma, g.sigma);
  return std::max(value, 0.0);
}

double poly_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size() || x.size() == 0) throw ShapeError("poly_kernel: dimension mismatch");
  const double t = x.dot(y) / static_cast<double>(x.size()) + 1.0;
  return t * t * t;
}

double mmd2_unbiased(const Features& x, const Features& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError("mmd2_unbiased: samples must have equal shape");
  }
  const Eigen::Index m = x.rows();
  if (m < 2) throw DataError("mmd2_unbiased: need at least 2 samples per side");
  const double inv_d = 1.0 / static_cast<double>(x.cols());
  auto cube = [inv_d](const Eigen::MatrixXd& dots) {
    return ((dots.array() * inv_d + 1.0).cube()).matrix();
  };
  const Eigen::MatrixXd kxx = cube(x * x.transpose());
  const Eigen::MatrixXd kyy = cube(y * y.transpose());
  const Eigen::MatrixXd kxy = cube(x * y.transpose());
  const double md = static_cast<double>(m);
  const double sxx = kxx.sum() - kxx.trace();
  const double syy = kyy.sum() - kyy.trace();
  return (sxx + syy) / (md * (md - 1.0)) - 2.0 * kxy.sum() / (md * md);
}

std::vector<std::size_t> kid_subsample(std::size_t rows, std::size_t m, std::uint64_t seed,
                                       std::size_t block, std::size_t side) {
  if (m > rows) {
    throw DataError("kid: cannot draw " + std::to_string(m) + " of " + std::to_string(rows) +
                    " rows");
  }
  CounterRng rng(hash_key(seed, block, side));
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) std::swap(order[i], order[i + rng.below(rows - i)]);
  order.resize(m);
  return order;
}

std::vector<double> kid_blocks(const Features& real, const Features& gen,
                               const KidOptions& options) {
  const std::size_t m = options.block_size;
  if (m < 2) throw ConfigError("kid: block size must be at least 2");
  if (options.n_blocks == 0) throw ConfigError("kid: need at least one block");
  if (real.cols() != gen.cols()) throw ShapeError("kid: feature dimensions differ");
  if (static_cast<std::size_t>(real.rows()) < m || static_cast<std::size_t>(gen.rows()) < m) {
    throw DataError("kid: need at least " + std::to_string(m) + " samples per side, got " +
                    std::to_string(real.rows()) + " and " + std::to_string(gen.rows()));
  }
  auto subsample = [&](const Features& f, std::size_t block, std::size_t side) {
    const auto rows =
        kid_subsample(static_cast<std::size_t>(f.rows()), m, options.seed, block, side);
    Features out(static_cast<Eigen::Index>(m), f.cols());
    for (std::size_t i = 0; i < m; ++i) {
      out.row(static_cast<Eigen::Index>(i)) = f.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
  };
  std::vector<double> blocks;
  blocks.reserve(options.n_blocks);
  for (std::size_t b = 0; b < options.n_blocks; ++b) {
    const Features x = subsample(real, b, 0);
    const Features y = subsample(gen, b, 1);
    blocks.push_back(mmd2_unbiased(x, y));
  }
  return blocks;
}

double kid(const Features& real, const Features& gen, const KidOptions& options) {
  const auto blocks = kid_blocks(real, gen, options);
  double s = 0.0;
  for (double v : blocks) s += v;
  return s / static_cast<double>(blocks.size());
}

void write_features(const std::filesystem::path& path, const Features& features) {
  ByteWriter w;
  w.magic("FEAT");
  w.u16(kFeatureVersion);
  w.u64(static_cast<std::uint64_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.cols()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) w.f64(features(i, j));
  }
  write_file_bytes(path, w.bytes());
}

Features read_features(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes, path.string());
  r.expect_magic("FEAT");
  const std::uint16_t version = r.u16();
  if (version != kFeatureVersion) r.fail("unsupported feature file version " + std::to_string(version));
  const std::uint64_t count = r.u64();
  const std::uint32_t dim = r.u32();
  if (dim != 0 && count > r.remaining() / 8 / dim) r.fail("count exceeds file size");
  Features f(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) f(i, j) = r.f64();
  }
  if (r.remaining() != 0) r.fail("trailing bytes");
  return f;
}

std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

std::string MetricRow::csv_header() { return "tick,fid,kid,embedder,n_real,n_gen"; }

std::string MetricRow::to_csv() const {
  return std::to_string(tick) + "," + format_double(fid) + "," + format_double(kid) + "," +
         embedder + "," + std::to_string(n_real) + "," + std::to_string(n_gen);
}

}  // namespace sgada
