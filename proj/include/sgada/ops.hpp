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
#include <memory>
#include <span>
#include <vector>

#include "sgada/tensor.hpp"

// Differentiable op set. Every backward is written in terms of these same
// ops, so gradients of gradients are available when requested.
//
// Image tensors are laid out NCHW.

namespace sgada {

// Elementwise. Binary ops require identical shapes; use broadcast_to first.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor square(const Tensor& x);
/// x^exponent; x must be positive unless the exponent is a non-negative integer.
Tensor pow_scalar(const Tensor& x, double exponent);
/// 1/x, with 0 mapped to 0.
Tensor safe_reciprocal(const Tensor& x);
Tensor sigmoid(const Tensor& x);
/// ln(1 + e^x), evaluated stably.
Tensor softplus(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double alpha);
/// g * (x > 0 ? 1 : alpha); differentiable in g only.
Tensor leaky_relu_grad(const Tensor& g, const Tensor& x, double alpha);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

// Shape manipulation.
Tensor reshape(const Tensor& x, Shape shape);
/// 2-D transpose.
Tensor transpose(const Tensor& x);
/// Expands size-1 axes to `shape`. Ranks must agree.
Tensor broadcast_to(const Tensor& x, const Shape& shape);
/// Sums over the axes where `shape` has size 1. Adjoint of broadcast_to.
Tensor sum_to(const Tensor& x, const Shape& shape);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
/// Embeds x at [start, start + x.dim(axis)) of a zero tensor with `full`
/// entries along `axis`. Adjoint of slice.
Tensor pad_axis(const Tensor& x, std::size_t axis, std::size_t start, std::size_t full);

/// Flat index map: out[i] = index[i] >= 0 ? x[index[i]] : 0.
struct IndexMap {
  Shape out_shape;
  Shape in_shape;
  std::vector<std::int64_t> index;
};
Tensor gather(const Tensor& x, std::shared_ptr<const IndexMap> map);
/// Adjoint of gather: accumulates g into positions of map->in_shape.
Tensor scatter_add(const Tensor& g, std::shared_ptr<const IndexMap> map);

// Reductions.
/// Scalar sum, shape [1].
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Sum over all axes but the first, shape [N].
Tensor sum_rows(const Tensor& x);
/// Euclidean norm of every row (all axes but the first), shape [N].
Tensor l2_norm_rows(const Tensor& x);
/// Euclidean norm of the whole tensor, shape [1].
Tensor l2_norm(const Tensor& x);

// Linear algebra and image ops.
/// [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// x: [N,F] with bias [F], or x: [N,C,H,W] with bias [C].
Tensor bias_add(const Tensor& x, const Tensor& bias);
/// Stride-1 correlation with symmetric zero padding that preserves H, W.
/// x: [N,C,H,W], weight: [O,C,K,K], K odd.
Tensor conv2d(const Tensor& x, const Tensor& weight);
/// d(conv2d)/d(weight) contracted with g: [O,C,K,K].
Tensor conv2d_weight_grad(const Tensor& x, const Tensor& g, std::size_t kernel);
/// w[o,c,ky,kx] -> w[c,o,K-1-ky,K-1-kx].
Tensor flip_swap_kernel(const Tensor& w);
Tensor upsample2x_nearest(const Tensor& x);
Tensor downsample2x_mean(const Tensor& x);
/// Multiplies every channel plane by a per-sample factor. s: [N,C].
Tensor scale_channels(const Tensor& x, const Tensor& s);

}  // namespace sgada
