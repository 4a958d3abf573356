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

#include <cmath>
#include <set>

#include "sgada/discriminator.hpp"
#include "sgada/errors.hpp"
#include "sgada/ops.hpp"
#include "support/gradcheck.hpp"
#include "support/tiny.hpp"

using namespace sgada;
using sgada::testing::check_gradients;
using sgada::testing::random_tensor;
using sgada::testing::tensors_of;
using sgada::testing::tiny_synthesis;

TEST(Discriminator, OneScorePerImage) {
  const Discriminator d(tiny_synthesis(), 1);
  EXPECT_EQ(d.num_blocks(), 2u);
  const Tensor s = d.score(random_tensor({5, 1, 16, 16}, 2, false));
  EXPECT_EQ(s.shape(), (Shape{5}));
}

TEST(Discriminator, BlocksHalveResolution) {
  const Discriminator d(tiny_synthesis(), 1);
  const Tensor y = d.block_forward(0, random_tensor({2, 2, 16, 16}, 3, false));
  EXPECT_EQ(y.shape(), (Shape{2, 3, 8, 8}));
}

TEST(Discriminator, ScoresAreIndependentAcrossBatch) {
  const Discriminator d(tiny_synthesis(), 4);
  const Tensor x = random_tensor({3, 1, 16, 16}, 5, false);
  const Tensor all = d.score(x);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(d.score(slice(x, 0, i, 1)).item(), all[i]);
}

TEST(Discriminator, ZeroMainBranchLeavesScaledSkip) {
  const Discriminator d(tiny_synthesis(), 6);
  Tensor skip;
  for (const auto& p : d.parameters()) {
    if (p.name == "disc.b16.conv1.weight") {
      Tensor t = p.tensor;
      t.assign(std::vector<double>(t.numel(), 0.0));
    }
    if (p.name == "disc.b16.skip.weight") skip = p.tensor;
  }
  const Tensor x = random_tensor({2, 2, 16, 16}, 8, false);
  const Tensor got = d.block_forward(0, x);
  const Tensor want = scale(conv2d(downsample2x_mean(x), skip), 1.0 / std::sqrt(2.0));
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.numel(); ++i) EXPECT_EQ(got[i], want[i]);
}

TEST(Discriminator, DeterministicInitAndUniqueNames) {
  const Discriminator a(tiny_synthesis(), 9), b(tiny_synthesis(), 9);
  const auto pa = a.parameters(), pb = b.parameters();
  std::set<std::string> names;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_TRUE(names.insert(pa[i].name).second);
    EXPECT_EQ(pa[i].tensor.to_vector(), pb[i].tensor.to_vector());
  }
}

TEST(Discriminator, RejectsWrongInputShape) {
  const Discriminator d(tiny_synthesis(), 1);
  EXPECT_THROW(d.score(Tensor::zeros({1, 1, 8, 8})), ShapeError);
  EXPECT_THROW(d.score(Tensor::zeros({1, 3, 16, 16})), ShapeError);
}

TEST(Discriminator, EndToEndGradientsAtSixteen) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Discriminator d(tiny_synthesis(), seed);
    std::vector<Tensor> leaves = tensors_of(d.parameters());
    Tensor x = random_tensor({2, 1, 16, 16}, seed + 70);
    leaves.push_back(x);
    const auto objective = [&] { return sum(softplus(d.score(x))); };
    sgada::testing::GradCheckOptions opts;
    opts.directions = 8;
    const auto res = check_gradients(objective, leaves, seed, opts);
    EXPECT_GT(res.evaluated, 0);
    EXPECT_LE(res.max_rel_error, 1e-4) << "seed " << seed;
  }
}
