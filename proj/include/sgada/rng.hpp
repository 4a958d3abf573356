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

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sgada {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Combines a key with a list of counters into one stream position.
constexpr std::uint64_t hash_key(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(key);
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (c + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits of a word.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based generator: the whole state is (key, counter), so it
/// serializes trivially and the same state always yields the same draws.
/// Distributions are computed here rather than with <random> so sequences
/// are identical across standard library implementations.
class CounterRng {
 public:
  CounterRng() = default;
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  std::uint64_t next_u64() noexcept { return hash_key(key_, counter_++); }

  double uniform() noexcept { return to_unit(next_u64()); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    // Multiply-shift; bias is below 2^-64 * n, irrelevant here.
    const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  /// Standard normal via Box-Muller; consumes exactly two words.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Derives an independent key for a sub-stream (e.g. a noise seed).
  std::uint64_t fork() noexcept { return next_u64(); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Stateless normal draw at a fixed stream position.
inline double normal_at(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0) noexcept {
  const std::uint64_t base = hash_key(key, a, b, c);
  const double u1 = 1.0 - to_unit(mix64(base));
  const double u2 = to_unit(mix64(base ^ 0xD1B54A32D192ED03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform_at(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) noexcept {
  return to_unit(hash_key(key, a, b, c));
}

}  // namespace sgada
