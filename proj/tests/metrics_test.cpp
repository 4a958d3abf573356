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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "sgada/errors.hpp"
#include "sgada/linalg.hpp"
#include "sgada/metrics.hpp"
#include "sgada/rng.hpp"
#include "support/gradcheck.hpp"

using namespace sgada;
using sgada::testing::random_tensor;

namespace {

Features random_features(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double shift = 0.0) {
  CounterRng rng(seed);
  Features f(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) f(i, j) = rng.normal() + shift;
  return f;
}

Eigen::MatrixXd random_spd(Eigen::Index n, std::uint64_t seed) {
  const Features a = random_features(n, n, seed);
  Eigen::MatrixXd m = a * a.transpose() / static_cast<double>(n) +
                      1e-3 * Eigen::MatrixXd::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

GaussianMoments moments_1d(double mu, double sigma) {
  GaussianMoments m;
  m.mu = Eigen::VectorXd::Constant(1, mu);
  m.sigma = SpdMatrix(Eigen::MatrixXd::Constant(1, 1, sigma));
  m.n = 2;
  return m;
}

GaussianMoments random_moments(Eigen::Index d, std::uint64_t seed) {
  GaussianMoments m;
  m.mu = random_features(d, 1, seed + 7);
  m.sigma = SpdMatrix(random_spd(d, seed));
  m.n = 100;
  return m;
}

// Literal double loops over the unbiased estimator.
double brute_mmd2(const Features& x, const Features& y) {
  const auto k = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double dot = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) dot += a(i) * b(i);
    const double t = dot / static_cast<double>(a.size()) + 1.0;
    return t * t * t;
  };
  const Eigen::Index m = x.rows();
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j) {
        xx += k(x.row(i), x.row(j));
        yy += k(y.row(i), y.row(j));
      }
      xy += k(x.row(i), y.row(j));
    }
  const double md = static_cast<double>(m);
  return xx / (md * (md - 1)) + yy / (md * (md - 1)) - 2.0 * xy / (md * md);
}

}  // namespace

TEST(Moments, HandExamples) {
  Features f(2, 2);
  f << 0, 0, 2, 2;
  const GaussianMoments m = gaussian_moments(f);
  EXPECT_EQ(m.mu, Eigen::Vector2d(1, 1));
  EXPECT_EQ(m.sigma.matrix(), (Eigen::Matrix2d() << 2, 2, 2, 2).finished());
  Features g(2, 1);
  g << 0, 2;
  EXPECT_EQ(gaussian_moments(g).sigma(0, 0), 2.0);
  EXPECT_EQ(gaussian_moments(Features::Constant(5, 3, 1.5)).sigma.matrix(), Eigen::MatrixXd::Zero(3, 3));
  EXPECT_THROW(gaussian_moments(Features::Zero(1, 3)), DataError);
}

TEST(Fid, ScalarClosedForms) {
  EXPECT_NEAR(fid(moments_1d(0, 1), moments_1d(1, 1)), 1.0, 1e-8);
  EXPECT_NEAR(fid(moments_1d(0.5, 4), moments_1d(0.5, 1)), 1.0, 1e-8);
}

TEST(Fid, DiagonalClosedForm) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(12));
    Eigen::VectorXd sr(d), sg(d), mr(d), mg(d);
    double expected = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      sr(i) = 0.1 + 3.0 * rng.uniform();
      sg(i) = 0.1 + 3.0 * rng.uniform();
      mr(i) = rng.normal();
      mg(i) = rng.normal();
      expected += (mr(i) - mg(i)) * (mr(i) - mg(i)) +
                  (std::sqrt(sr(i)) - std::sqrt(sg(i))) * (std::sqrt(sr(i)) - std::sqrt(sg(i)));
    }
    GaussianMoments a{mr, SpdMatrix::diagonal(sr), 10}, b{mg, SpdMatrix::diagonal(sg), 10};
    EXPECT_NEAR(fid(a, b), expected, 1e-8) << seed;
  }
}

TEST(Fid, IdentityAndSymmetry) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GaussianMoments a = random_moments(16, seed), b = random_moments(16, seed + 1000);
    EXPECT_NEAR(fid(a, a), 0.0, 1e-8);
    EXPECT_NEAR(fid(a, b), fid(b, a), 1e-8);
    EXPECT_GE(fid(a, b), 0.0);
  }
  EXPECT_THROW(fid(random_moments(3, 1), random_moments(4, 1)), ShapeError);
}

TEST(Fid, MatrixSqrtSquaresBackOnHundredRandomSpd) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>((seed * 37) % 64);
    const Eigen::MatrixXd m = random_spd(seed == 99 ? 64 : n, seed);
    const SpdMatrix s = matrix_sqrt_spd(SpdMatrix(m));
    EXPECT_LE((s.matrix() * s.matrix() - m).norm() / m.norm(), 1e-8) << "seed " << seed;
  }
}

TEST(Kernel, Examples) {
  EXPECT_EQ(poly_kernel(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, 1, 1)), 8.0);
  EXPECT_EQ(poly_kernel(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(2, 0, 1)), 8.0);
  EXPECT_EQ(poly_kernel(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), 1.0);
}

TEST(Kernel, GramIsSymmetricAndPsd) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Features x = random_features(30, 5, seed);
    Eigen::MatrixXd gram(30, 30);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 30; ++j) gram(i, j) = poly_kernel(x.row(i).transpose(), x.row(j).transpose());
    EXPECT_EQ((gram - gram.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(Kid, HandExample) {
  Features x(2, 2);
  x << 1, 1, 1, -1;
  EXPECT_EQ(poly_kernel(x.row(0).transpose(), x.row(0).transpose()), 8.0);
  EXPECT_EQ(poly_kernel(x.row(0).transpose(), x.row(1).transpose()), 1.0);
  EXPECT_EQ(mmd2_unbiased(x, x), -7.0);
  EXPECT_EQ(kid(x, x, {.block_size = 2, .n_blocks = 3, .seed = 4}), -7.0);
}

TEST(Kid, EstimatorMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Features x = random_features(25, 6, seed), y = random_features(25, 6, seed + 50, 0.3);
    EXPECT_NEAR(mmd2_unbiased(x, y), brute_mmd2(x, y), 1e-12);
  }
}

TEST(Kid, EveryBlockMatchesBruteForceOnItsSubsample) {
  const Features real = random_features(60, 8, 1), gen = random_features(70, 8, 2, 0.5);
  const KidOptions opt{.block_size = 20, .n_blocks = 6, .seed = 9};
  const auto blocks = kid_blocks(real, gen, opt);
  ASSERT_EQ(blocks.size(), 6u);
  double mean = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto ri = kid_subsample(60, 20, opt.seed, b, 0);
    const auto gi = kid_subsample(70, 20, opt.seed, b, 1);
    std::vector<bool> seen(60, false);
    Features xs(20, 8), ys(20, 8);
    for (int i = 0; i < 20; ++i) {
      ASSERT_FALSE(seen[ri[i]]);
      seen[ri[i]] = true;
      xs.row(i) = real.row(static_cast<Eigen::Index>(ri[i]));
      ys.row(i) = gen.row(static_cast<Eigen::Index>(gi[i]));
    }
    EXPECT_NEAR(blocks[b], brute_mmd2(xs, ys), 1e-12);
    mean += blocks[b] / 6.0;
  }
  EXPECT_NEAR(kid(real, gen, opt), mean, 1e-15);
}

TEST(Kid, FullBlockEqualsWholeSampleEstimate) {
  const Features x = random_features(15, 4, 3), y = random_features(15, 4, 4);
  const double whole = brute_mmd2(x, y);
  for (double b : kid_blocks(x, y, {.block_size = 15, .n_blocks = 4, .seed = 1}))
    EXPECT_NEAR(b, whole, 1e-12);
}

TEST(Kid, SelfDistanceIsNearZero) {
  std::vector<double> est;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Features a = random_features(100, 8, 2 * t), b = random_features(100, 8, 2 * t + 1);
    est.push_back(kid(a, b, {.block_size = 50, .n_blocks = 4, .seed = t}));
  }
  double mean = 0.0, var = 0.0;
  for (double v : est) mean += v / 100.0;
  for (double v : est) var += (v - mean) * (v - mean) / 99.0;
  const double sd = std::sqrt(var);
  EXPECT_LE(std::abs(mean), 3.0 * sd);
  int inside = 0;
  for (double v : est) inside += std::abs(v) <= 3.0 * sd;
  EXPECT_GE(inside, 95);
}

TEST(Kid, RejectsInsufficientSamples) {
  const Features x = random_features(5, 2, 1);
  EXPECT_THROW(kid(x, x, {.block_size = 6}), DataError);
  EXPECT_THROW(kid(x, x, {.block_size = 1}), ConfigError);
  EXPECT_THROW(kid(x, random_features(5, 3, 1), {.block_size = 2}), ShapeError);
}

TEST(Embed, PixelsAtEightIsFlatten) {
  const Tensor img = random_tensor({3, 2, 8, 8}, 5, false);
  const Features f = embed(img, {EmbedderKind::kPixels, 0});
  ASSERT_EQ(f.cols(), 128);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 128; ++j) EXPECT_EQ(f(i, j), img[static_cast<std::size_t>(i * 128 + j)]);
}

TEST(Embed, PixelsAveragesBlocks) {
  const Tensor img = random_tensor({1, 1, 16, 16}, 6, false);
  const Features f = embed(img, {});
  const double expected = (img[0] + img[1] + img[16] + img[17]) / 4.0;
  EXPECT_NEAR(f(0, 0), expected, 1e-15);
}

TEST(Embed, IdenticalImagesGiveIdenticalFeatures) {
  const Tensor one = random_tensor({1, 1, 16, 16}, 7, false);
  std::vector<double> two = one.to_vector();
  two.insert(two.end(), two.begin(), two.end());
  for (EmbedderKind k : {EmbedderKind::kPixels, EmbedderKind::kRandConv}) {
    const Features f = embed(Tensor::from_data({2, 1, 16, 16}, two), {k, 3});
    EXPECT_EQ(f.row(0), f.row(1));
  }
}

TEST(Embed, RandConvShapeSeedAndErrors) {
  const Tensor img = random_tensor({70, 1, 16, 16}, 8, false);
  const Features a = embed(img, {EmbedderKind::kRandConv, 1});
  EXPECT_EQ(a.cols(), 128);
  EXPECT_EQ(a.rows(), 70);
  EXPECT_EQ(a, embed(img, {EmbedderKind::kRandConv, 1}));
  EXPECT_NE(a, embed(img, {EmbedderKind::kRandConv, 2}));
  EXPECT_THROW(embed(Tensor::zeros({1, 1, 4, 4}), {}), ShapeError);
  EXPECT_EQ(parse_embedder("randconv"), EmbedderKind::kRandConv);
  EXPECT_THROW(parse_embedder("inception"), ConfigError);
}

// Child side of the cross-process check; inert unless the variable is set.
TEST(Embed, WriteRandConvFeaturesForParent) {
  const char* out = std::getenv("SGADA_FEATURE_OUT");
  if (out == nullptr) GTEST_SKIP();
  write_features(out, embed(random_tensor({4, 1, 16, 16}, 21, false), {EmbedderKind::kRandConv, 5}));
}

TEST(Embed, RandConvIsBitIdenticalAcrossProcesses) {
  if (std::getenv("SGADA_FEATURE_OUT") != nullptr) GTEST_SKIP();
  const auto dir = std::filesystem::temp_directory_path() / "sgada_metrics_test";
  std::filesystem::create_directories(dir);
  const auto self = std::filesystem::read_symlink("/proc/self/exe");
  const Features here = embed(random_tensor({4, 1, 16, 16}, 21, false), {EmbedderKind::kRandConv, 5});
  for (int run = 0; run < 2; ++run) {
    const auto path = dir / ("child" + std::to_string(run) + ".feat");
    std::filesystem::remove(path);
    const std::string cmd = "SGADA_FEATURE_OUT=" + path.string() +
                            " " + self.string() + " --gtest_filter=Embed.WriteRandConvFeaturesForParent"
                            " > /dev/null";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_EQ(read_features(path), here);
  }
}

TEST(FeatureFile, RoundTripAndCorruption) {
  const auto dir = std::filesystem::temp_directory_path() / "sgada_metrics_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "rt.feat";
  const Features f = random_features(7, 3, 2);
  write_features(path, f);
  EXPECT_EQ(read_features(path), f);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  EXPECT_THROW(read_features(path), DataError);
}

TEST(MetricRow, CsvShape) {
  MetricRow r{.tick = 3, .fid = 0.5, .kid = -0.25, .embedder = "pixels", .n_real = 10, .n_gen = 20};
  EXPECT_EQ(MetricRow::csv_header(), "tick,fid,kid,embedder,n_real,n_gen");
  EXPECT_EQ(r.to_csv(), "3,0.5,-0.25,pixels,10,20");
  EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
}
