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

#include "sgada/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "sgada/errors.hpp"

namespace sgada {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(x.shape()));
  }
}

template <typename F>
std::vector<double> map_values(const Tensor& x, F f) {
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return out;
}

template <typename F>
std::vector<double> zip_values(const Tensor& a, const Tensor& b, F f) {
  std::vector<double> out(a.numel());
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i], y[i]);
  return out;
}

Shape ones_like_rank(std::size_t rank) { return Shape(rank, 1); }

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Strides of a row-major shape.
std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

// Visits `big` in row-major order as runs along its last axis. For each run
// the callback receives (offset into big, offset into small, run length,
// stride of small along the run: 0 when broadcast, 1 otherwise).
template <typename F>
void for_each_broadcast_run(const Shape& small, const Shape& big, F&& f) {
  const std::size_t rank = big.size();
  const auto small_strides = strides_of(small);
  const std::size_t run = big[rank - 1];
  const std::size_t run_stride = small[rank - 1] == 1 ? 0 : 1;
  const std::size_t runs = shape_numel(big) / run;
  std::vector<std::size_t> counter(rank, 0);
  std::size_t small_offset = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    f(r * run, small_offset, run, run_stride);
    for (std::size_t axis = rank - 1; axis-- > 0;) {
      ++counter[axis];
      if (small[axis] != 1) small_offset += small_strides[axis];
      if (counter[axis] < big[axis]) break;
      if (small[axis] != 1) small_offset -= small_strides[axis] * big[axis];
      counter[axis] = 0;
    }
  }
}

void check_broadcastable(const Shape& small, const Shape& big, const char* op) {
  bool ok = small.size() == big.size();
  for (std::size_t i = 0; ok && i < small.size(); ++i) {
    ok = small[i] == big[i] || small[i] == 1;
  }
  if (!ok) {
    throw ShapeError(std::string(op) + ": cannot relate " + shape_str(small) + " and " +
                     shape_str(big));
  }
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

struct ConvDims {
  std::size_t n, c, h, w, o, k;
};

ConvDims conv_dims(const Tensor& x, const Shape& weight_shape, const char* op) {
  require_rank(x, 4, op);
  if (weight_shape.size() != 4 || weight_shape[2] != weight_shape[3] || weight_shape[2] % 2 == 0) {
    throw ShapeError(std::string(op) + ": kernel must be [O,C,K,K] with odd K, got " +
                     shape_str(weight_shape));
  }
  if (weight_shape[1] != x.dim(1)) {
    throw ShapeError(std::string(op) + ": input has " + std::to_string(x.dim(1)) +
                     " channels, kernel expects " + std::to_string(weight_shape[1]));
  }
  return {x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight_shape[0], weight_shape[2]};
}

// Per-thread patch buffer, grown on demand and never shrunk.
double* scratch(std::size_t size) {
  thread_local std::unique_ptr<double[]> buffer;
  thread_local std::size_t capacity = 0;
  if (size > capacity) {
    buffer.reset(new double[size]);
    capacity = size;
  }
  return buffer.get();
}

// cols: [C*K*K, H*W] patch matrix of one sample with zero padding.
void im2col(const double* x, const ConvDims& d, double* cols) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(d.k / 2);
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(d.h);
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(d.w);
  std::size_t row = 0;
  for (std::size_t c = 0; c < d.c; ++c) {
    const double* plane = x + c * d.h * d.w;
    for (std::size_t ky = 0; ky < d.k; ++ky) {
      for (std::size_t kx = 0; kx < d.k; ++kx, ++row) {
        double* dst = cols + row * d.h * d.w;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        for (std::ptrdiff_t i = 0; i < h; ++i) {
          const std::ptrdiff_t sy = i + dy;
          double* out_row = dst + i * w;
          if (sy < 0 || sy >= h) {
            std::fill(out_row, out_row + w, 0.0);
            continue;
          }
          const double* src_row = plane + sy * w;
          for (std::ptrdiff_t j = 0; j < w; ++j) {
            const std::ptrdiff_t sx = j + dx;
            out_row[j] = (sx < 0 || sx >= w) ? 0.0 : src_row[sx];
          }
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return Tensor::make_result(a.shape(), zip_values(a, b, std::plus<>{}), "add", {a, b},
                             [](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{g, g};
                             });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return Tensor::make_result(a.shape(), zip_values(a, b, std::minus<>{}), "sub", {a, b},
                             [](const Tensor& g, const std::vector<bool>& needs) {
                               return std::vector<Tensor>{g, needs[1] ? neg(g) : Tensor()};
                             });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return Tensor::make_result(a.shape(), zip_values(a, b, std::multiplies<>{}), "mul", {a, b},
                             [a, b](const Tensor& g, const std::vector<bool>& needs) {
                               return std::vector<Tensor>{needs[0] ? mul(g, b) : Tensor(),
                                                          needs[1] ? mul(g, a) : Tensor()};
                             });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor scale(const Tensor& x, double factor) {
  return Tensor::make_result(x.shape(), map_values(x, [factor](double v) { return v * factor; }),
                             "scale", {x},
                             [factor](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{scale(g, factor)};
                             });
}

Tensor add_scalar(const Tensor& x, double value) {
  return Tensor::make_result(x.shape(), map_values(x, [value](double v) { return v + value; }),
                             "add_scalar", {x},
                             [](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{g};
                             });
}

Tensor square(const Tensor& x) {
  return Tensor::make_result(x.shape(), map_values(x, [](double v) { return v * v; }), "square",
                             {x}, [x](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{scale(mul(g, x), 2.0)};
                             });
}

Tensor pow_scalar(const Tensor& x, double exponent) {
  if (exponent == 1.0) return x;
  return Tensor::make_result(
      x.shape(), map_values(x, [exponent](double v) { return std::pow(v, exponent); }),
      "pow_scalar", {x}, [x, exponent](const Tensor& g, const std::vector<bool>&) {
        if (exponent == 0.0) return std::vector<Tensor>{Tensor::zeros(x.shape())};
        return std::vector<Tensor>{mul(g, scale(pow_scalar(x, exponent - 1.0), exponent))};
      });
}

Tensor safe_reciprocal(const Tensor& x) {
  return Tensor::make_result(x.shape(),
                             map_values(x, [](double v) { return v == 0.0 ? 0.0 : 1.0 / v; }),
                             "safe_reciprocal", {x},
                             [x](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{neg(mul(g, square(safe_reciprocal(x))))};
                             });
}

Tensor sigmoid(const Tensor& x) {
  return Tensor::make_result(x.shape(), map_values(x, stable_sigmoid), "sigmoid", {x},
                             [x](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{
                                   mul(g, mul(sigmoid(x), sigmoid(neg(x))))};
                             });
}

Tensor softplus(const Tensor& x) {
  return Tensor::make_result(x.shape(), map_values(x, stable_softplus), "softplus", {x},
                             [x](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{mul(g, sigmoid(x))};
                             });
}

Tensor leaky_relu(const Tensor& x, double alpha) {
  if (auto* probe = ActivationProbe::current()) probe->record(x.data());
  const Tensor mask_source = x.detach();
  return Tensor::make_result(
      x.shape(), map_values(x, [alpha](double v) { return v > 0.0 ? v : alpha * v; }),
      "leaky_relu", {x}, [mask_source, alpha](const Tensor& g, const std::vector<bool>&) {
        return std::vector<Tensor>{leaky_relu_grad(g, mask_source, alpha)};
      });
}

Tensor leaky_relu_grad(const Tensor& g, const Tensor& x, double alpha) {
  require_same_shape(g, x, "leaky_relu_grad");
  const Tensor mask_source = x.detach();
  return Tensor::make_result(
      g.shape(), zip_values(g, x, [alpha](double gv, double xv) { return xv > 0.0 ? gv : alpha * gv; }),
      "leaky_relu_grad", {g}, [mask_source, alpha](const Tensor& gg, const std::vector<bool>&) {
        return std::vector<Tensor>{leaky_relu_grad(gg, mask_source, alpha)};
      });
}

// ---------------------------------------------------------------- shapes

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  const Shape original = x.shape();
  return Tensor::make_result(std::move(shape), x.to_vector(), "reshape", {x},
                             [original](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{reshape(g, original)};
                             });
}

Tensor transpose(const Tensor& x) {
  require_rank(x, 2, "transpose");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = in[i * cols + j];
  return Tensor::make_result({cols, rows}, std::move(out), "transpose", {x},
                             [](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{transpose(g)};
                             });
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  check_broadcastable(x.shape(), shape, "broadcast_to");
  if (x.shape() == shape) return x;
  std::vector<double> out(shape_numel(shape));
  auto in = x.data();
  for_each_broadcast_run(x.shape(), shape, [&](std::size_t dst, std::size_t src, std::size_t len,
                                               std::size_t stride) {
    if (stride == 0) {
      std::fill_n(out.begin() + dst, len, in[src]);
    } else {
      std::copy_n(in.begin() + src, len, out.begin() + dst);
    }
  });
  const Shape original = x.shape();
  return Tensor::make_result(shape, std::move(out), "broadcast_to", {x},
                             [original](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{sum_to(g, original)};
                             });
}

Tensor sum_to(const Tensor& x, const Shape& shape) {
  check_broadcastable(shape, x.shape(), "sum_to");
  if (x.shape() == shape) return x;
  std::vector<double> out(shape_numel(shape), 0.0);
  auto in = x.data();
  for_each_broadcast_run(shape, x.shape(), [&](std::size_t src, std::size_t dst, std::size_t len,
                                               std::size_t stride) {
    if (stride == 0) {
      double acc = 0.0;
      for (std::size_t j = 0; j < len; ++j) acc += in[src + j];
      out[dst] += acc;
    } else {
      for (std::size_t j = 0; j < len; ++j) out[dst + j] += in[src + j];
    }
  });
  const Shape original = x.shape();
  return Tensor::make_result(shape, std::move(out), "sum_to", {x},
                             [original](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{broadcast_to(g, original)};
                             });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw ShapeError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    Shape s = p.shape();
    if (s.size() != first.size()) throw ShapeError("concat: rank mismatch");
    out_shape[axis] += s[axis];
    s[axis] = first[axis];
    if (s != first) throw ShapeError("concat: non-concatenated axes differ");
  }
  const AxisSplit total = split_axis(out_shape, axis);
  std::vector<double> out(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    offsets.push_back(offset);
    const AxisSplit s = split_axis(p.shape(), axis);
    auto in = p.data();
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(in.begin() + o * s.extent * s.inner, s.extent * s.inner,
                  out.begin() + (o * total.extent + offset) * total.inner);
    }
    offset += s.extent;
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  std::vector<std::size_t> lengths;
  for (const Tensor& p : parts) lengths.push_back(p.dim(axis));
  return Tensor::make_result(out_shape, std::move(out), "concat", inputs,
                             [axis, offsets, lengths](const Tensor& g, const std::vector<bool>& needs) {
                               std::vector<Tensor> grads(offsets.size());
                               for (std::size_t i = 0; i < offsets.size(); ++i) {
                                 if (needs[i]) grads[i] = slice(g, axis, offsets[i], lengths[i]);
                               }
                               return grads;
                             });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  if (axis >= x.rank() || length == 0 || start + length > x.dim(axis)) {
    throw ShapeError("slice: range out of bounds for " + shape_str(x.shape()));
  }
  const AxisSplit s = split_axis(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  std::vector<double> out(shape_numel(out_shape));
  auto in = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(in.begin() + (o * s.extent + start) * s.inner, length * s.inner,
                out.begin() + o * length * s.inner);
  }
  const std::size_t full = x.dim(axis);
  return Tensor::make_result(out_shape, std::move(out), "slice", {x},
                             [axis, start, full](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{pad_axis(g, axis, start, full)};
                             });
}

Tensor pad_axis(const Tensor& x, std::size_t axis, std::size_t start, std::size_t full) {
  if (axis >= x.rank() || start + x.dim(axis) > full) {
    throw ShapeError("pad_axis: range out of bounds");
  }
  const AxisSplit s = split_axis(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = full;
  std::vector<double> out(shape_numel(out_shape), 0.0);
  auto in = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(in.begin() + o * s.extent * s.inner, s.extent * s.inner,
                out.begin() + (o * full + start) * s.inner);
  }
  const std::size_t length = x.dim(axis);
  return Tensor::make_result(out_shape, std::move(out), "pad_axis", {x},
                             [axis, start, length](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{slice(g, axis, start, length)};
                             });
}

Tensor gather(const Tensor& x, std::shared_ptr<const IndexMap> map) {
  if (x.shape() != map->in_shape || map->index.size() != shape_numel(map->out_shape)) {
    throw ShapeError("gather: index map does not match input " + shape_str(x.shape()));
  }
  std::vector<double> out(map->index.size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int64_t src = map->index[i];
    out[i] = src >= 0 ? in[static_cast<std::size_t>(src)] : 0.0;
  }
  return Tensor::make_result(map->out_shape, std::move(out), "gather", {x},
                             [map](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{scatter_add(g, map)};
                             });
}

Tensor scatter_add(const Tensor& g, std::shared_ptr<const IndexMap> map) {
  if (g.shape() != map->out_shape) throw ShapeError("scatter_add: shape mismatch");
  std::vector<double> out(shape_numel(map->in_shape), 0.0);
  auto in = g.data();
  for (std::size_t i = 0; i < map->index.size(); ++i) {
    const std::int64_t dst = map->index[i];
    if (dst >= 0) out[static_cast<std::size_t>(dst)] += in[i];
  }
  return Tensor::make_result(map->in_shape, std::move(out), "scatter_add", {g},
                             [map](const Tensor& gg, const std::vector<bool>&) {
                               return std::vector<Tensor>{gather(gg, map)};
                             });
}

// ---------------------------------------------------------------- reductions

Tensor sum(const Tensor& x) {
  auto in = x.data();
  const double total = std::accumulate(in.begin(), in.end(), 0.0);
  const Shape original = x.shape();
  return Tensor::make_result({1}, {total}, "sum", {x},
                             [original](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{
                                   broadcast_to(reshape(g, ones_like_rank(original.size())), original)};
                             });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor sum_rows(const Tensor& x) {
  Shape row_shape(x.rank(), 1);
  row_shape[0] = x.dim(0);
  return reshape(sum_to(x, row_shape), {x.dim(0)});
}

Tensor l2_norm_rows(const Tensor& x) {
  const std::size_t rows = x.dim(0);
  const std::size_t width = x.numel() / rows;
  std::vector<double> out(rows);
  auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) acc += in[r * width + j] * in[r * width + j];
    out[r] = std::sqrt(acc);
  }
  return Tensor::make_result({rows}, std::move(out), "l2_norm_rows", {x},
                             [x](const Tensor& g, const std::vector<bool>&) {
                               Shape row_shape(x.rank(), 1);
                               row_shape[0] = x.dim(0);
                               const Tensor inv = safe_reciprocal(l2_norm_rows(x));
                               const Tensor factor = reshape(mul(g, inv), row_shape);
                               return std::vector<Tensor>{mul(x, broadcast_to(factor, x.shape()))};
                             });
}

Tensor l2_norm(const Tensor& x) { return reshape(l2_norm_rows(reshape(x, {1, x.numel()})), {1}); }

// ---------------------------------------------------------------- linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: inner dimensions differ " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  MutMap(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)).noalias() =
      ConstMap(a.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) *
      ConstMap(b.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  return Tensor::make_result({m, n}, std::move(out), "matmul", {a, b},
                             [a, b](const Tensor& g, const std::vector<bool>& needs) {
                               return std::vector<Tensor>{
                                   needs[0] ? matmul(g, transpose(b)) : Tensor(),
                                   needs[1] ? matmul(transpose(a), g) : Tensor()};
                             });
}

Tensor bias_add(const Tensor& x, const Tensor& bias) {
  require_rank(bias, 1, "bias_add");
  if (x.rank() < 2 || x.dim(1) != bias.dim(0)) {
    throw ShapeError("bias_add: bias " + shape_str(bias.shape()) + " does not match " +
                     shape_str(x.shape()));
  }
  Shape view(x.rank(), 1);
  view[1] = bias.dim(0);
  return add(x, broadcast_to(reshape(bias, view), x.shape()));
}

Tensor scale_channels(const Tensor& x, const Tensor& s) {
  require_rank(x, 4, "scale_channels");
  if (s.shape() != Shape{x.dim(0), x.dim(1)}) {
    throw ShapeError("scale_channels: scale " + shape_str(s.shape()) + " does not match " +
                     shape_str(x.shape()));
  }
  return mul(x, broadcast_to(reshape(s, {x.dim(0), x.dim(1), 1, 1}), x.shape()));
}

Tensor conv2d(const Tensor& x, const Tensor& weight) {
  const ConvDims d = conv_dims(x, weight.shape(), "conv2d");
  const std::size_t hw = d.h * d.w;
  const std::size_t patch = d.c * d.k * d.k;
  std::vector<double> out(d.n * d.o * hw);
  const ConstMap wmat(weight.data().data(), static_cast<Eigen::Index>(d.o),
                      static_cast<Eigen::Index>(patch));
  double* cols = d.k == 1 ? nullptr : scratch(patch * hw);
  for (std::size_t n = 0; n < d.n; ++n) {
    const double* xn = x.data().data() + n * d.c * hw;
    const double* src = xn;
    if (d.k != 1) {
      im2col(xn, d, cols);
      src = cols;
    }
    MutMap(out.data() + n * d.o * hw, static_cast<Eigen::Index>(d.o),
           static_cast<Eigen::Index>(hw))
        .noalias() = wmat * ConstMap(src, static_cast<Eigen::Index>(patch),
                                     static_cast<Eigen::Index>(hw));
  }
  const std::size_t k = d.k;
  return Tensor::make_result({d.n, d.o, d.h, d.w}, std::move(out), "conv2d", {x, weight},
                             [x, weight, k](const Tensor& g, const std::vector<bool>& needs) {
                               return std::vector<Tensor>{
                                   needs[0] ? conv2d(g, flip_swap_kernel(weight)) : Tensor(),
                                   needs[1] ? conv2d_weight_grad(x, g, k) : Tensor()};
                             });
}

Tensor conv2d_weight_grad(const Tensor& x, const Tensor& g, std::size_t kernel) {
  require_rank(g, 4, "conv2d_weight_grad");
  const ConvDims d = conv_dims(x, {g.dim(1), x.dim(1), kernel, kernel}, "conv2d_weight_grad");
  if (g.dim(0) != d.n || g.dim(2) != d.h || g.dim(3) != d.w) {
    throw ShapeError("conv2d_weight_grad: gradient " + shape_str(g.shape()) +
                     " does not match input " + shape_str(x.shape()));
  }
  const std::size_t hw = d.h * d.w;
  const std::size_t patch = d.c * d.k * d.k;
  RowMat acc = RowMat::Zero(static_cast<Eigen::Index>(d.o), static_cast<Eigen::Index>(patch));
  double* cols = d.k == 1 ? nullptr : scratch(patch * hw);
  for (std::size_t n = 0; n < d.n; ++n) {
    const double* xn = x.data().data() + n * d.c * hw;
    const double* src = xn;
    if (d.k != 1) {
      im2col(xn, d, cols);
      src = cols;
    }
    acc.noalias() += ConstMap(g.data().data() + n * d.o * hw, static_cast<Eigen::Index>(d.o),
                              static_cast<Eigen::Index>(hw)) *
                     ConstMap(src, static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(hw))
                         .transpose();
  }
  std::vector<double> out(acc.data(), acc.data() + acc.size());
  return Tensor::make_result({d.o, d.c, d.k, d.k}, std::move(out), "conv2d_weight_grad", {x, g},
                             [x, g](const Tensor& gw, const std::vector<bool>& needs) {
                               return std::vector<Tensor>{
                                   needs[0] ? conv2d(g, flip_swap_kernel(gw)) : Tensor(),
                                   needs[1] ? conv2d(x, gw) : Tensor()};
                             });
}

Tensor flip_swap_kernel(const Tensor& w) {
  require_rank(w, 4, "flip_swap_kernel");
  const std::size_t o = w.dim(0), c = w.dim(1), k = w.dim(2);
  std::vector<double> out(w.numel());
  auto in = w.data();
  for (std::size_t oi = 0; oi < o; ++oi)
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t ky = 0; ky < k; ++ky)
        for (std::size_t kx = 0; kx < k; ++kx)
          out[((ci * o + oi) * k + (k - 1 - ky)) * k + (k - 1 - kx)] =
              in[((oi * c + ci) * k + ky) * k + kx];
  return Tensor::make_result({c, o, k, k}, std::move(out), "flip_swap_kernel", {w},
                             [](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{flip_swap_kernel(g)};
                             });
}

Tensor upsample2x_nearest(const Tensor& x) {
  require_rank(x, 4, "upsample2x_nearest");
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  std::vector<double> out(planes * 4 * h * w);
  auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * h * w;
    double* dst = out.data() + p * 4 * h * w;
    for (std::size_t i = 0; i < 2 * h; ++i)
      for (std::size_t j = 0; j < 2 * w; ++j) dst[i * 2 * w + j] = src[(i / 2) * w + j / 2];
  }
  return Tensor::make_result({x.dim(0), x.dim(1), 2 * h, 2 * w}, std::move(out),
                             "upsample2x_nearest", {x},
                             [](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{scale(downsample2x_mean(g), 4.0)};
                             });
}

Tensor downsample2x_mean(const Tensor& x) {
  require_rank(x, 4, "downsample2x_mean");
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 || w % 2) throw ShapeError("downsample2x_mean: odd spatial size " + shape_str(x.shape()));
  const std::size_t oh = h / 2, ow = w / 2;
  std::vector<double> out(planes * oh * ow);
  auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * h * w;
    double* dst = out.data() + p * oh * ow;
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        const double* a = src + 2 * i * w + 2 * j;
        dst[i * ow + j] = 0.25 * ((a[0] + a[1]) + (a[w] + a[w + 1]));
      }
  }
  return Tensor::make_result({x.dim(0), x.dim(1), oh, ow}, std::move(out), "downsample2x_mean",
                             {x}, [](const Tensor& g, const std::vector<bool>&) {
                               return std::vector<Tensor>{scale(upsample2x_nearest(g), 0.25)};
                             });
}

}  // namespace sgada
