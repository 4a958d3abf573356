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

#include "sgada/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sgada/errors.hpp"

namespace sgada {

SpdMatrix::SpdMatrix(Eigen::MatrixXd entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw ShapeError("SpdMatrix requires a non-empty square matrix");
  }
  if (!entries.allFinite()) throw NumericError("SpdMatrix entries must be finite");
  const Eigen::Index n = entries.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = entries(i, j), b = entries(j, i);
      if (std::abs(a - b) > kSymmetryTolerance * std::max(1.0, std::abs(a))) {
        throw NumericError("SpdMatrix input is not symmetric at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      }
      const double avg = 0.5 * (a + b);
      entries(i, j) = avg;
      entries(j, i) = avg;
    }
  }
  entries_ = std::move(entries);
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SpdMatrix SpdMatrix::diagonal(const Eigen::VectorXd& diag) {
  return SpdMatrix(Eigen::MatrixXd(diag.asDiagonal()));
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, int max_sweeps) {
  const Eigen::Index n = symmetric.rows();
  Eigen::MatrixXd a = symmetric;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  auto off_norm2 = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return s;
  };
  const double scale2 = std::max(a.squaredNorm(), std::numeric_limits<double>::min());
  constexpr double eps = std::numeric_limits<double>::epsilon();

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm2() <= eps * eps * scale2) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle from the classical stable formula.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_norm2() > 1e3 * eps * eps * scale2) {
    throw NumericError("Jacobi eigendecomposition did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

SpdMatrix matrix_sqrt_spd(const SpdMatrix& m) {
  const SymmetricEigen eig = jacobi_eigen(m.matrix());
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  Eigen::VectorXd roots(eig.values.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double lambda = eig.values(i);
    if (lambda < -SpdMatrix::kNegativeEigenTolerance * scale) {
      throw NumericError("matrix_sqrt_spd: eigenvalue " + std::to_string(lambda) +
                         " is negative beyond tolerance");
    }
    roots(i) = std::sqrt(std::max(lambda, 0.0));
  }
  Eigen::MatrixXd s = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  s = 0.5 * (s + s.transpose()).eval();
  return SpdMatrix(std::move(s));
}

double trace_sqrt_product(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("trace_sqrt_product: dimension mismatch");
  const Eigen::MatrixXd root_a = matrix_sqrt_spd(a).matrix();
  Eigen::MatrixXd inner = root_a * b.matrix() * root_a;
  inner = 0.5 * (inner + inner.transpose()).eval();
  const SymmetricEigen eig = jacobi_eigen(inner);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  double trace = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double lambda = eig.values(i);
    if (lambda < -SpdMatrix::kNegativeEigenTolerance * scale) {
      throw NumericError("trace_sqrt_product: product has a negative eigenvalue");
    }
    trace += std::sqrt(std::max(lambda, 0.0));
  }
  return trace;
}

}  // namespace sgada
