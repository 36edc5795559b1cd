#pragma once

#include "dfm/types.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace dfm {

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-9;

/// SVD-based subspace queries; singular values below tol * sigma_max count as zero.
template <typename Derived>
class SubspaceDecomposition {
 public:
  using Scalar = typename Derived::Scalar;
  using MatrixType = MatrixX<Scalar>;

  explicit SubspaceDecomposition(const Eigen::MatrixBase<Derived>& M, Scalar tol = Scalar(kRankTolerance))
      : rows_(M.rows()), cols_(M.cols()) {
    if (rows_ == 0 || cols_ == 0) {
      V_ = MatrixType::Identity(cols_, cols_);
      U_ = MatrixType::Identity(rows_, rows_);
      rank_ = 0;
      return;
    }
    Eigen::JacobiSVD<MatrixType> svd(M.derived().eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const Scalar cutoff = tol * s(0);
    rank_ = 0;
    if (s(0) > Scalar(0))
      while (rank_ < s.size() && s(rank_) > cutoff) ++rank_;
    U_ = svd.matrixU();
    V_ = svd.matrixV();
    singular_values_ = s;
  }

  Index rank() const noexcept { return rank_; }
  /// Orthonormal columns spanning Null(M).
  MatrixType null_space() const { return V_.rightCols(cols_ - rank_); }
  /// Orthonormal columns spanning Range(M^T).
  MatrixType row_space() const { return V_.leftCols(rank_); }
  /// Orthonormal columns spanning Range(M).
  MatrixType column_space() const { return U_.leftCols(rank_); }
  const VectorX<Scalar>& singular_values() const noexcept { return singular_values_; }

 private:
  Index rows_, cols_;
  Index rank_ = 0;
  MatrixType U_, V_;
  VectorX<Scalar> singular_values_;
};

template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& M, typename Derived::Scalar tol = kRankTolerance) {
  return SubspaceDecomposition<Derived>(M, tol).rank();
}

template <typename Derived>
MatrixX<typename Derived::Scalar> null_space_basis(const Eigen::MatrixBase<Derived>& M,
                                                   typename Derived::Scalar tol = kRankTolerance) {
  return SubspaceDecomposition<Derived>(M, tol).null_space();
}

/// Orthonormal rows spanning the row space of M; replaces M x = 0 by an equivalent full-row-rank system.
template <typename Derived>
MatrixX<typename Derived::Scalar> row_space_rows(const Eigen::MatrixBase<Derived>& M,
                                                 typename Derived::Scalar tol = kRankTolerance) {
  return SubspaceDecomposition<Derived>(M, tol).row_space().transpose();
}

template <typename Derived>
MatrixX<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& M,
                                                 typename Derived::Scalar tol = kRankTolerance) {
  using MatrixType = MatrixX<typename Derived::Scalar>;
  if (M.rows() == 0 || M.cols() == 0) return MatrixType::Zero(M.cols(), M.rows());
  Eigen::JacobiSVD<MatrixType> svd(M.derived().eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto s = svd.singularValues();
  const auto cutoff = tol * s(0);
  VectorX<typename Derived::Scalar> inv = s;
  for (Index k = 0; k < s.size(); ++k) inv(k) = s(k) > cutoff && s(k) > 0 ? 1 / s(k) : 0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace dfm
