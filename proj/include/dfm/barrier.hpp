#pragma once

#include "dfm/problem.hpp"

namespace dfm {

/// Inverse barrier B_i(x) = sum_j 1 / (-g_i^j(x)) with its first and second derivatives.
struct BarrierEval {
  double value = 0;
  Vector gradient;
  Matrix hessian;
};

/// Throws BarrierDomainError unless every g_i^j(x) < 0.
BarrierEval barrier_eval(const NodeLocal& node, const Vector& x);
double barrier_value(const NodeLocal& node, const Vector& x);
Vector barrier_gradient(const NodeLocal& node, const Vector& x);

/// Single-constraint term B^j = 1 / (-g^j).
double barrier_term_value(const Constraint& g, const Vector& x);
Vector barrier_term_gradient(const Constraint& g, const Vector& x);

/// L_B = (4 beta1^2 M^3 + 2 beta M^2) q_max with M = F0_minus_fstar / rho.
/// beta may be zero (affine constraints); every other argument must be positive.
double smoothness_constant_LB(double F0_minus_fstar, double rho, double beta, double beta1, int q_max);

struct SmoothnessResidual {
  /// Bregman residual B^j(y) - B^j(x) - <grad B^j(x), y - x>.
  double lhs = 0;
  /// ||grad B^j(y) - grad B^j(x)||^2 / (8 beta1^2 M^3 + 4 beta M^2).
  double rhs = 0;
};

/// Both sides of the local smoothness inequality lhs >= rhs on the sublevel set {B^j <= M}.
/// Throws std::invalid_argument when x or y is not interior or exceeds the level M.
SmoothnessResidual local_smoothness_residual(const Constraint& g, const Vector& x, const Vector& y, double M,
                                             double beta, double beta1);
SmoothnessResidual local_smoothness_residual(const NodeLocal& node, int j, const Vector& x, const Vector& y, double M,
                                             double beta, double beta1);

}  // namespace dfm
