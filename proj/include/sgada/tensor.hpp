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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sgada {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor;

/// Receives the gradient of the op output and a mask of which inputs need
/// a gradient; returns one tensor per input (null where not needed). The
/// returned tensors are built from recorded ops, so a backward pass can
/// itself be differentiated.
using BackwardFn =
    std::function<std::vector<Tensor>(const Tensor& grad_out, const std::vector<bool>& needs)>;

namespace detail {
struct Node;
}

/// Dense row-major array of doubles with an optional differentiation record.
///
/// Tensor is a shared handle: copies alias the same node. Values are fixed
/// after construction; only leaves may be reassigned (parameter updates) and
/// only `grad` accumulates.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from_data(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  explicit operator bool() const noexcept { return defined(); }

  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::span<const double> data() const;
  std::vector<double> to_vector() const;
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }

  bool requires_grad() const;
  bool is_leaf() const;
  const char* op_name() const;

  /// Accumulated gradient from `backward`; null when none has been stored.
  Tensor grad() const;
  void zero_grad();

  /// Same values, no differentiation record.
  Tensor detach() const;

  /// Overwrites the values of a leaf tensor in place. Used by optimizers.
  void assign(std::span<const double> values);

  /// Identity of the underlying node.
  const void* id() const noexcept { return node_.get(); }

  // Engine-facing constructor; use the factory functions instead.
  static Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                            std::vector<Tensor> inputs, BackwardFn backward);

 private:
  friend struct detail::Node;
  friend class GradEngine;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// True unless a NoGradGuard is active on this thread.
bool grad_enabled() noexcept;

/// Disables recording of new ops on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() noexcept;
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

struct GradOptions {
  /// Record the backward pass so its results can be differentiated again.
  bool create_graph = false;
  /// Return zeros for `wrt` entries the root does not depend on instead of
  /// throwing.
  bool allow_unused = false;
};

/// d(root)/d(wrt[i]) for each i. `root` must be a scalar.
std::vector<Tensor> gradients(const Tensor& root, std::span<const Tensor> wrt,
                              GradOptions options = {});

/// Accumulates d(root)/d(leaf) into `grad` of every requires_grad leaf the
/// root depends on. Accumulation is additive; call zero_grad between steps.
void backward(const Tensor& root);

/// Hashes the sign pattern of every leaky_relu input evaluated on this thread
/// while alive. Finite-difference checks use it to reject perturbations that
/// cross an activation kink.
class ActivationProbe {
 public:
  ActivationProbe() noexcept;
  ~ActivationProbe();
  ActivationProbe(const ActivationProbe&) = delete;
  ActivationProbe& operator=(const ActivationProbe&) = delete;

  std::uint64_t signature() const noexcept { return signature_; }
  void record(std::span<const double> values) noexcept;

  static ActivationProbe* current() noexcept;

 private:
  ActivationProbe* previous_;
  std::uint64_t signature_ = 0;
};

}  // namespace sgada
