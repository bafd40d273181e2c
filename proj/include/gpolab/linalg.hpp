#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace gpolab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Row-major so that each embedding is a contiguous row.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vec = Vector<double>;

/// Rows are points in R^d (sampled or ingested embeddings).
using EmbeddingMatrix = RowMatrix<double>;

/// Per-row preference orientation, +1 or -1.
using SignVector = Eigen::Matrix<std::int8_t, Eigen::Dynamic, 1>;

template <typename Derived>
bool rows_unit_norm(const Eigen::MatrixBase<Derived>& rows, double tol = 1e-9) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (std::abs(rows.row(i).norm() - 1.0) > tol) return false;
  }
  return true;
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

}  // namespace gpolab
