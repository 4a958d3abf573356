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

// Central finite-difference oracle for the autodiff engine. Leaves are
// perturbed in place, the scalar objective is re-evaluated at x +/- h*v, and
// the quotient is compared with the analytic directional derivative. The
// oracle never calls gradients() on the perturbed evaluations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "sgada/rng.hpp"
#include "sgada/tensor.hpp"

namespace sgada::testing {

struct GradCheckOptions {
  double step = 1e-5;
  /// Check every coordinate separately when the leaves hold at most this many
  /// values; otherwise check random directions.
  std::size_t full_limit = 300;
  int directions = 3;
  /// Absolute floor of the relative-error denominator.
  double floor = 1e-10;
  /// Attempts to find a direction whose probe points stay off activation kinks.
  int kink_retries = 8;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  int evaluated = 0;
  int skipped = 0;
};

inline double evaluate_at(const std::function<Tensor()>& objective, std::vector<Tensor>& leaves,
                          const std::vector<std::vector<double>>& base,
                          const std::vector<std::vector<double>>& direction, double t,
                          std::uint64_t* signature) {
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    std::vector<double> v = base[i];
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += t * direction[i][j];
    leaves[i].assign(v);
  }
  ActivationProbe probe;
  // Recording stays on: objectives may differentiate internally.
  const double value = objective().item();
  if (signature) *signature = probe.signature();
  return value;
}

inline double rel_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// `objective` must rebuild its graph from the current leaf values on every
/// call. Leaves are restored before returning.
inline GradCheckResult check_gradients(const std::function<Tensor()>& objective,
                                       std::vector<Tensor> leaves, std::uint64_t seed,
                                       GradCheckOptions options = {}) {
  std::vector<std::vector<double>> base;
  std::size_t total = 0;
  for (const Tensor& leaf : leaves) {
    base.push_back(leaf.to_vector());
    total += leaf.numel();
  }

  std::uint64_t base_signature = 0;
  std::vector<Tensor> analytic;
  {
    ActivationProbe probe;
    const Tensor root = objective();
    base_signature = probe.signature();
    analytic = gradients(root, leaves, {.create_graph = false, .allow_unused = true});
  }

  GradCheckResult result;
  auto try_direction = [&](const std::vector<std::vector<double>>& dir) {
    std::uint64_t sig_plus = 0, sig_minus = 0;
    const double plus = evaluate_at(objective, leaves, base, dir, options.step, &sig_plus);
    const double minus = evaluate_at(objective, leaves, base, dir, -options.step, &sig_minus);
    if (sig_plus != base_signature || sig_minus != base_signature) return false;
    const double numeric = (plus - minus) / (2.0 * options.step);
    double exact = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      auto g = analytic[i].data();
      for (std::size_t j = 0; j < g.size(); ++j) exact += g[j] * dir[i][j];
    }
    result.max_rel_error = std::max(result.max_rel_error, rel_error(exact, numeric, options.floor));
    ++result.evaluated;
    return true;
  };

  std::vector<std::vector<double>> dir(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) dir[i].assign(base[i].size(), 0.0);

  if (total <= options.full_limit) {
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      for (std::size_t j = 0; j < base[i].size(); ++j) {
        dir[i][j] = 1.0;
        if (!try_direction(dir)) ++result.skipped;
        dir[i][j] = 0.0;
      }
    }
  } else {
    CounterRng rng(seed);
    for (int d = 0; d < options.directions; ++d) {
      bool ok = false;
      for (int attempt = 0; attempt <= options.kink_retries && !ok; ++attempt) {
        double norm2 = 0.0;
        for (auto& row : dir)
          for (double& v : row) {
            v = rng.normal();
            norm2 += v * v;
          }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& row : dir)
          for (double& v : row) v *= inv;
        ok = try_direction(dir);
        if (!ok) ++result.skipped;
      }
    }
  }

  for (std::size_t i = 0; i < leaves.size(); ++i) leaves[i].assign(base[i]);
  return result;
}

inline Tensor random_tensor(Shape shape, std::uint64_t seed, bool requires_grad = true,
                            double scale = 1.0) {
  CounterRng rng(seed);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = scale * rng.normal();
  return Tensor::from_data(std::move(shape), std::move(v), requires_grad);
}

}  // namespace sgada::testing
