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

#include "sgada/toy_data.hpp"

#include <algorithm>
#include <cmath>

#include "sgada/errors.hpp"
#include "sgada/rng.hpp"

namespace sgada {

namespace {

struct Canvas {
  std::size_t r;
  std::vector<double> v;

  explicit Canvas(std::size_t res) : r(res), v(res * res, 0.0) {}

  void blob(double cx, double cy, double sigma, double amp) {
    for (std::size_t y = 0; y < r; ++y) {
      for (std::size_t x = 0; x < r; ++x) {
        const double dx = static_cast<double>(x) + 0.5 - cx;
        const double dy = static_cast<double>(y) + 0.5 - cy;
        v[y * r + x] += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
    }
  }

  void ring(double radius, double width, double amp) {
    const double c = 0.5 * static_cast<double>(r);
    for (std::size_t y = 0; y < r; ++y) {
      for (std::size_t x = 0; x < r; ++x) {
        const double d = std::hypot(static_cast<double>(x) + 0.5 - c, static_cast<double>(y) + 0.5 - c);
        const double t = (d - radius) / width;
        v[y * r + x] += amp * std::exp(-0.5 * t * t);
      }
    }
  }

  std::vector<std::uint8_t> pixels() const {
    std::vector<std::uint8_t> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = static_cast<std::uint8_t>(std::clamp(std::floor(255.0 * v[i] + 0.5), 0.0, 255.0));
    }
    return out;
  }
};

}  // namespace

std::vector<std::string> toy_corpus_kinds() { return {"two-mode", "symmetric-blobs", "rings"}; }

RecordSet make_toy_corpus(std::string_view kind, std::size_t count, std::uint16_t resolution,
                          std::uint64_t seed) {
  if (count == 0) throw ConfigError("toy corpus needs at least one image");
  if (resolution < 8) throw ConfigError("toy corpus resolution must be at least 8");
  const auto kinds = toy_corpus_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw ConfigError("unknown toy corpus '" + std::string(kind) + "'");
  }
  const double r = resolution;
  RecordSet set;
  set.resolution = resolution;
  set.channels = 1;
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(hash_key(seed, i));
    auto jitter = [&](double span) { return (2.0 * rng.uniform() - 1.0) * span; };
    Canvas canvas(resolution);
    std::uint8_t label = 0;
    if (kind == "two-mode") {
      label = static_cast<std::uint8_t>(rng.below(2));
      const double base = label == 0 ? 0.3 : 0.7;
      canvas.blob(base * r + jitter(0.04 * r), base * r + jitter(0.04 * r),
                  0.1 * r * (1.0 + jitter(0.15)), 0.9 + jitter(0.1));
    } else if (kind == "symmetric-blobs") {
      const double y = (0.4 + jitter(0.06)) * r;
      const double dx = (0.2 + jitter(0.04)) * r;
      const double sigma = 0.07 * r * (1.0 + jitter(0.15));
      const double amp = 0.8 + jitter(0.15);
      canvas.blob(0.5 * r - dx, y, sigma, amp);
      canvas.blob(0.5 * r + dx, y, sigma, amp);
      canvas.blob(0.5 * r, (0.72 + jitter(0.04)) * r, 0.09 * r * (1.0 + jitter(0.15)),
                  0.6 + jitter(0.15));
    } else {
      canvas.ring((0.27 + jitter(0.08)) * r, 0.04 * r * (1.0 + jitter(0.2)), 0.9 + jitter(0.1));
    }
    DatasetRecord rec;
    rec.label = label;
    rec.width = resolution;
    rec.height = resolution;
    rec.channels = 1;
    rec.pixels = canvas.pixels();
    set.records.push_back(std::move(rec));
  }
  return set;
}

}  // namespace sgada
