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

#include <functional>
#include <vector>

#include "sgada/generator.hpp"
#include "sgada/params.hpp"
#include "sgada/tensor.hpp"

namespace sgada::testing {

/// 16x16 architecture small enough for end-to-end finite differences.
inline SynthesisConfig tiny_synthesis() {
  SynthesisConfig c;
  c.target_resolution = 16;
  c.channels = {{4, 4}, {8, 3}, {16, 2}};
  c.z_dim = 4;
  c.w_dim = 4;
  c.mapping_depth = 2;
  return c;
}

inline std::vector<Tensor> tensors_of(const ParamList& params) {
  std::vector<Tensor> out;
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

}  // namespace sgada::testing
