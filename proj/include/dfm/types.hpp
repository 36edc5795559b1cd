#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace dfm {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// One d_i-vector per node, in node order.
using BlockVector = std::vector<Vector>;

/// Default absolute tolerance on ||A x - c||_inf for an allocation to count as feasible.
inline constexpr double kFeasibilityTolerance = 1e-9;
/// An allocation is strictly interior when every g_i^j(x_i) <= -kInteriorTolerance.
inline constexpr double kInteriorTolerance = 1e-12;

}  // namespace dfm
