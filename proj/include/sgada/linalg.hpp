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

#include <Eigen/Dense>

namespace sgada {

/// Symmetric positive semi-definite matrix.
///
/// Construction validates symmetry to |M_ij - M_ji| <= 1e-12 * max(1, |M_ij|)
/// and stores the exactly symmetrized average. Eigenvalues down to -1e-10
/// are accepted as rounding noise and clamped to zero by consumers.
class SpdMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;
  static constexpr double kNegativeEigenTolerance = 1e-10;

  SpdMatrix() = default;
  explicit SpdMatrix(Eigen::MatrixXd entries);

  static SpdMatrix identity(Eigen::Index dim);
  static SpdMatrix diagonal(const Eigen::VectorXd& diag);

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  Eigen::MatrixXd entries_;
};

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps until the
/// off-diagonal mass falls below machine precision relative to the diagonal.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, int max_sweeps = 100);

/// Principal square root: S symmetric PSD with S*S = M. Negative eigenvalues
/// within tolerance are clamped to zero; larger ones raise NumericError.
SpdMatrix matrix_sqrt_spd(const SpdMatrix& m);

/// tr(sqrt(A^{1/2} B A^{1/2})), which equals tr((A B)^{1/2}) for PSD A, B.
double trace_sqrt_product(const SpdMatrix& a, const SpdMatrix& b);

}  // namespace sgada
