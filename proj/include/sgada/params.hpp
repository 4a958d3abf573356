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
#include <string>
#include <string_view>
#include <vector>

#include "sgada/tensor.hpp"

namespace sgada {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Ordered parameter table. Order is part of the checkpoint contract.
using ParamList = std::vector<NamedTensor>;

/// FNV-1a, used to key parameter initialization by name.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Leaf tensor with i.i.d. normal(0, stddev) entries. The stream depends on
/// (seed, name) only, so adding or removing other parameters never changes
/// this one's initial value.
Tensor init_normal(std::uint64_t seed, std::string_view name, Shape shape, double stddev);
Tensor init_constant(Shape shape, double value);

/// Copies values from `source` into `target` by name. Returns the target
/// names that had no same-shaped source entry.
std::vector<std::string> copy_matching(const ParamList& source, const ParamList& target);

}  // namespace sgada
