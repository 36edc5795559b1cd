#include "dfm/barrier.hpp"

#include "dfm/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dfm {

namespace {

double checked_value(const Constraint& g, const Vector& x) {
  const double v = g.value(x);
  if (!(v < 0)) throw BarrierDomainError("barrier undefined: constraint value " + std::to_string(v) + " is not negative");
  return v;
}

}  // namespace

double barrier_term_value(const Constraint& g, const Vector& x) { return -1.0 / checked_value(g, x); }

Vector barrier_term_gradient(const Constraint& g, const Vector& x) {
  const double v = checked_value(g, x);
  return g.gradient(x) / (v * v);
}

BarrierEval barrier_eval(const NodeLocal& node, const Vector& x) {
  BarrierEval out{0.0, Vector::Zero(node.dim), Matrix::Zero(node.dim, node.dim)};
  for (const auto& g : node.constraints) {
    const double v = checked_value(*g, x);
    const Vector dg = g->gradient(x);
    const double v2 = v * v;
    out.value -= 1.0 / v;
    out.gradient += dg / v2;
    // -2/v^3 > 0 on the interior, so both terms are PSD for convex g.
    out.hessian += g->hessian(x) / v2 - (2.0 / (v2 * v)) * dg * dg.transpose();
  }
  return out;
}

double barrier_value(const NodeLocal& node, const Vector& x) {
  double b = 0;
  for (const auto& g : node.constraints) b -= 1.0 / checked_value(*g, x);
  return b;
}

Vector barrier_gradient(const NodeLocal& node, const Vector& x) {
  Vector out = Vector::Zero(node.dim);
  for (const auto& g : node.constraints) out += barrier_term_gradient(*g, x);
  return out;
}

double smoothness_constant_LB(double F0_minus_fstar, double rho, double beta, double beta1, int q_max) {
  if (!(F0_minus_fstar > 0) || !(rho > 0) || !(beta1 > 0) || q_max < 1 || !(beta >= 0))
    throw std::invalid_argument("smoothness_constant_LB: arguments must be positive");
  const double M = F0_minus_fstar / rho;
  return (4.0 * beta1 * beta1 * M * M * M + 2.0 * beta * M * M) * q_max;
}

SmoothnessResidual local_smoothness_residual(const Constraint& g, const Vector& x, const Vector& y, double M,
                                             double beta, double beta1) {
  if (!(M > 0) || beta < 0 || beta1 < 0) throw std::invalid_argument("local_smoothness_residual: bad constants");
  const double gx = g.value(x);
  const double gy = g.value(y);
  if (!(gx < 0) || !(gy < 0)) throw std::invalid_argument("local_smoothness_residual: points must be interior");
  const double bx = -1.0 / gx;
  const double by = -1.0 / gy;
  const double level_slack = M * (1 + 1e-12);
  if (bx > level_slack || by > level_slack)
    throw std::invalid_argument("local_smoothness_residual: barrier exceeds the level M");
  const Vector dx = g.gradient(x) / (gx * gx);
  const Vector dy = g.gradient(y) / (gy * gy);
  SmoothnessResidual out;
  out.lhs = by - bx - dx.dot(y - x);
  out.rhs = (dy - dx).squaredNorm() / (8.0 * beta1 * beta1 * M * M * M + 4.0 * beta * M * M);
  return out;
}

SmoothnessResidual local_smoothness_residual(const NodeLocal& node, int j, const Vector& x, const Vector& y, double M,
                                             double beta, double beta1) {
  return local_smoothness_residual(*node.constraints.at(static_cast<std::size_t>(j)), x, y, M, beta, beta1);
}

}  // namespace dfm
