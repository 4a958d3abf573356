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

#include "sgada/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "sgada/errors.hpp"
#include "sgada/ops.hpp"
#include "sgada/rng.hpp"

namespace sgada {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<Tensor> inputs;
  BackwardFn backward;
  Tensor grad;
};

}  // namespace detail

namespace {

thread_local bool t_grad_enabled = true;
thread_local ActivationProbe* t_probe = nullptr;

void check_finite(std::span<const double> values, const char* op) {
  // Exponent-field test on the raw bits; an integer OR-reduction vectorizes.
  constexpr std::uint64_t kExponent = 0x7FF0000000000000ULL;
  std::uint64_t bad = 0;
  for (double v : values) {
    bad |= static_cast<std::uint64_t>((std::bit_cast<std::uint64_t>(v) & kExponent) == kExponent);
  }
  if (bad) throw NumericError(std::string("non-finite value produced by ") + op);
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::from_data(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("shape " + shape_str(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  check_finite(values, "from_data");
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values, const char* op,
                           std::vector<Tensor> inputs, BackwardFn backward) {
  assert(shape_numel(shape) == values.size());
  check_finite(values, op);
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->op = op;
  const bool record =
      t_grad_enabled && std::any_of(inputs.begin(), inputs.end(),
                                    [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (record) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) throw ShapeError("axis out of range");
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const double> Tensor::data() const { return node_->value; }

std::vector<double> Tensor::to_vector() const { return node_->value; }

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

bool Tensor::is_leaf() const { return !node_->backward; }

const char* Tensor::op_name() const { return node_->op; }

Tensor Tensor::grad() const { return node_->grad; }

void Tensor::zero_grad() { node_->grad = Tensor(); }

Tensor Tensor::detach() const {
  auto node = std::make_shared<detail::Node>();
  node->shape = node_->shape;
  node->value = node_->value;
  return Tensor(std::move(node));
}

void Tensor::assign(std::span<const double> values) {
  if (!is_leaf()) throw Error("assign() is only valid on leaf tensors");
  if (values.size() != numel()) throw ShapeError("assign() size mismatch");
  check_finite(values, "assign");
  std::copy(values.begin(), values.end(), node_->value.begin());
}

bool grad_enabled() noexcept { return t_grad_enabled; }

NoGradGuard::NoGradGuard() noexcept : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

ActivationProbe::ActivationProbe() noexcept : previous_(t_probe) { t_probe = this; }
ActivationProbe::~ActivationProbe() { t_probe = previous_; }
ActivationProbe* ActivationProbe::current() noexcept { return t_probe; }

void ActivationProbe::record(std::span<const double> values) noexcept {
  std::uint64_t word = 0;
  std::size_t bit = 0;
  for (double v : values) {
    word = (word << 1) | (v > 0.0 ? 1u : 0u);
    if (++bit == 64) {
      signature_ = mix64(signature_ ^ word);
      word = 0;
      bit = 0;
    }
  }
  signature_ = mix64(signature_ ^ word ^ (static_cast<std::uint64_t>(values.size()) << 7));
}

class GradEngine {
 public:
  using NodePtr = detail::Node*;

  static std::vector<Tensor> topo_order(const Tensor& root) {
    // Post-order DFS: inputs precede their consumers.
    std::vector<Tensor> order;
    std::unordered_map<NodePtr, int> state;  // 1 = on stack, 2 = done
    std::vector<std::pair<Tensor, std::size_t>> stack;
    stack.emplace_back(root, 0);
    state[root.node_.get()] = 1;
    while (!stack.empty()) {
      auto& [handle, next] = stack.back();
      NodePtr node = handle.node_.get();
      if (next < node->inputs.size()) {
        const Tensor& child = node->inputs[next++];
        if (!child.defined() || !child.requires_grad()) continue;
        auto it = state.find(child.node_.get());
        if (it == state.end()) {
          state[child.node_.get()] = 1;
          stack.emplace_back(child, 0);
        } else if (it->second == 1) {
          assert(false && "cycle in differentiation record");
          throw Error("cycle in differentiation record");
        }
      } else {
        state[node] = 2;
        order.push_back(handle);
        stack.pop_back();
      }
    }
    return order;
  }

  static std::vector<Tensor> run(const Tensor& root, std::span<const Tensor> wrt,
                                 GradOptions options) {
    if (!root.defined() || root.numel() != 1) {
      throw ShapeError("gradient root must be a scalar tensor");
    }
    std::vector<Tensor> result(wrt.size());
    if (!root.requires_grad()) {
      return finish(result, wrt, options);
    }

    std::unordered_set<NodePtr> targets;
    for (const Tensor& t : wrt) targets.insert(t.node_.get());

    const std::vector<Tensor> order = topo_order(root);
    std::unordered_set<NodePtr> needed;
    for (const Tensor& handle : order) {
      NodePtr node = handle.node_.get();
      bool need = targets.count(node) > 0;
      for (const Tensor& in : node->inputs) {
        if (in.defined() && needed.count(in.node_.get())) need = true;
      }
      if (need) needed.insert(node);
    }

    std::optional<NoGradGuard> guard;
    if (!options.create_graph) guard.emplace();

    std::unordered_map<NodePtr, Tensor> grads;
    grads[root.node_.get()] = Tensor::full(root.shape(), 1.0);

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      NodePtr node = it->node_.get();
      if (!needed.count(node)) continue;
      auto found = grads.find(node);
      if (found == grads.end()) continue;
      if (!node->backward) continue;
      std::vector<bool> needs(node->inputs.size());
      bool any = false;
      for (std::size_t i = 0; i < node->inputs.size(); ++i) {
        const Tensor& in = node->inputs[i];
        needs[i] = in.defined() && in.requires_grad() && needed.count(in.node_.get()) > 0;
        any = any || needs[i];
      }
      if (!any) continue;
      const Tensor grad_out = found->second;
      if (!targets.count(node)) grads.erase(found);
      std::vector<Tensor> in_grads = node->backward(grad_out, needs);
      assert(in_grads.size() == node->inputs.size());
      for (std::size_t i = 0; i < in_grads.size(); ++i) {
        if (!needs[i] || !in_grads[i].defined()) continue;
        NodePtr child = node->inputs[i].node_.get();
        if (in_grads[i].shape() != child->shape) {
          throw ShapeError(std::string("backward of ") + node->op + " produced gradient of shape " +
                           shape_str(in_grads[i].shape()) + ", expected " +
                           shape_str(child->shape));
        }
        auto slot = grads.find(child);
        if (slot == grads.end()) {
          grads.emplace(child, std::move(in_grads[i]));
        } else {
          slot->second = add(slot->second, in_grads[i]);
        }
      }
    }

    for (std::size_t i = 0; i < wrt.size(); ++i) {
      auto found = grads.find(wrt[i].node_.get());
      if (found != grads.end()) result[i] = found->second;
    }
    return finish(result, wrt, options);
  }

  static std::vector<Tensor> finish(std::vector<Tensor>& result, std::span<const Tensor> wrt,
                                    GradOptions options) {
    for (std::size_t i = 0; i < wrt.size(); ++i) {
      if (result[i].defined()) continue;
      if (!options.allow_unused) {
        throw Error("gradient requested for a tensor the root does not depend on");
      }
      result[i] = Tensor::zeros(wrt[i].shape());
    }
    return result;
  }

  static void accumulate(const Tensor& root) {
    if (!root.defined() || root.numel() != 1) {
      throw ShapeError("backward() root must be a scalar tensor");
    }
    if (!root.requires_grad()) return;
    std::vector<Tensor> leaves;
    for (const Tensor& handle : topo_order(root)) {
      if (handle.is_leaf() && handle.requires_grad()) leaves.push_back(handle);
    }
    std::vector<Tensor> grads = run(root, leaves, {});
    NoGradGuard guard;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      detail::Node* node = leaves[i].node_.get();
      node->grad = node->grad.defined() ? add(node->grad, grads[i]) : grads[i].detach();
    }
  }

};

std::vector<Tensor> gradients(const Tensor& root, std::span<const Tensor> wrt,
                              GradOptions options) {
  return GradEngine::run(root, wrt, options);
}

void backward(const Tensor& root) { GradEngine::accumulate(root); }

}  // namespace sgada
