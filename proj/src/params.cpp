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

#include "sgada/params.hpp"

#include <unordered_map>

#include "sgada/rng.hpp"

namespace sgada {

Tensor init_normal(std::uint64_t seed, std::string_view name, Shape shape, double stddev) {
  CounterRng rng(hash_key(seed, fnv1a(name)));
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = stddev * rng.normal();
  return Tensor::from_data(std::move(shape), std::move(values), true);
}

Tensor init_constant(Shape shape, double value) { return Tensor::full(std::move(shape), value, true); }

std::vector<std::string> copy_matching(const ParamList& source, const ParamList& target) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& p : source) by_name.emplace(p.name, &p.tensor);
  std::vector<std::string> missing;
  for (const auto& p : target) {
    auto it = by_name.find(p.name);
    if (it == by_name.end() || it->second->shape() != p.tensor.shape()) {
      missing.push_back(p.name);
      continue;
    }
    Tensor dst = p.tensor;
    dst.assign(it->second->data());
  }
  return missing;
}

}  // namespace sgada
