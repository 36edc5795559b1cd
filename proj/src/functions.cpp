#include "dfm/functions.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace dfm {

namespace {

double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

QuadraticCost::QuadraticCost(Matrix Q, Vector b, double c, std::optional<double> smoothness)
    : Q_(std::move(Q)), b_(std::move(b)), c_(c) {
  if (Q_.rows() != Q_.cols() || Q_.rows() != b_.size())
    throw std::invalid_argument("quadratic cost: Q must be square and match b");
  if ((Q_ - Q_.transpose()).norm() > 1e-12 * std::max(1.0, Q_.norm()))
    throw std::invalid_argument("quadratic cost: Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q_, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double lmin = ev.size() ? ev.minCoeff() : 0.0;
  const double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  if (lmin < -1e-12 * std::max(1.0, std::abs(lmax)))
    throw std::invalid_argument("quadratic cost: Q must be positive semidefinite");
  strong_convexity_ = std::max(lmin, 0.0);
  smoothness_ = smoothness.value_or(lmax);
  if (smoothness_ < lmax * (1 - 1e-12))
    throw std::invalid_argument("quadratic cost: smoothness constant below lambda_max(Q)");
}

std::shared_ptr<const QuadraticCost> QuadraticCost::centered(double curvature, double target) {
  return std::make_shared<QuadraticCost>(Matrix::Constant(1, 1, curvature), Vector::Constant(1, -curvature * target),
                                         0.5 * curvature * target * target);
}

std::shared_ptr<const QuadraticCost> QuadraticCost::polynomial(double a, double b, double c) {
  return std::make_shared<QuadraticCost>(Matrix::Constant(1, 1, 2.0 * a), Vector::Constant(1, b), c);
}

double QuadraticCost::value(const Vector& x) const { return 0.5 * x.dot(Q_ * x) + b_.dot(x) + c_; }

Vector QuadraticCost::gradient(const Vector& x) const { return Q_ * x + b_; }

std::optional<double> QuadraticCost::global_lower_bound() const {
  // Bounded below iff b lies in Range(Q); the minimum is then c - 1/2 b^T Q^+ b.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Q_);
  const Vector xmin = -cod.solve(b_);
  if ((Q_ * xmin + b_).norm() > 1e-9 * std::max(1.0, b_.norm())) return std::nullopt;
  return value(xmin);
}

MultiResourceCost::MultiResourceCost(double alpha, double beta, double demand)
    : QuadraticCost((Matrix(2, 2) << 2 * alpha, 2 * alpha, 2 * alpha, 2 * (alpha + beta)).finished(),
                    Vector::Constant(2, -2 * alpha * demand), alpha * demand * demand),
      alpha_(alpha),
      beta_(beta),
      demand_(demand) {
  if (!(alpha > 0) || !(beta > 0)) throw std::invalid_argument("multi-resource cost: alpha and beta must be positive");
}

SigmoidCost::SigmoidCost(Index dim, double a, double b, double p)
    : dim_(dim), a_(a), b_(b), p_(p), q_(-p * logistic(-a * b)) {
  if (dim < 1) throw std::invalid_argument("sigmoid cost: dimension must be positive");
  if (!(a > 0) || !(p > 0)) throw std::invalid_argument("sigmoid cost: a and p must be positive");
}

double SigmoidCost::utility(double rate) const { return p_ * logistic(a_ * (rate - b_)) + q_; }

double SigmoidCost::value(const Vector& x) const { return -utility(x(0)); }

Vector SigmoidCost::gradient(const Vector& x) const {
  const double s = logistic(a_ * (x(0) - b_));
  Vector g = Vector::Zero(dim_);
  g(0) = -p_ * a_ * s * (1 - s);
  return g;
}

std::optional<Matrix> SigmoidCost::hessian(const Vector& x) const {
  const double s = logistic(a_ * (x(0) - b_));
  Matrix h = Matrix::Zero(dim_, dim_);
  h(0, 0) = -p_ * a_ * a_ * s * (1 - s) * (1 - 2 * s);
  return h;
}

CallbackCost::CallbackCost(Index dim, ValueFn value, GradientFn gradient, double smoothness, HessianFn hessian)
    : dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      smoothness_(smoothness) {
  if (!value_ || !gradient_) throw std::invalid_argument("callback cost: value and gradient are required");
}

std::optional<Matrix> CallbackCost::hessian(const Vector& x) const {
  if (!hessian_) return std::nullopt;
  return hessian_(x);
}

AffineConstraint::AffineConstraint(Vector a, double b) : a_(std::move(a)), b_(b) {}

QuadraticConstraint::QuadraticConstraint(Matrix P, Vector q, double r) : P_(std::move(P)), q_(std::move(q)), r_(r) {
  if (P_.rows() != P_.cols() || P_.rows() != q_.size())
    throw std::invalid_argument("quadratic constraint: P must be square and match q");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().size() && eig.eigenvalues().minCoeff() < -1e-12)
    throw std::invalid_argument("quadratic constraint: P must be positive semidefinite");
}

CallbackConstraint::CallbackConstraint(Index dim, ValueFn value, GradientFn gradient, HessianFn hessian)
    : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)) {
  if (!value_ || !gradient_) throw std::invalid_argument("callback constraint: value and gradient are required");
}

Matrix CallbackConstraint::hessian(const Vector& x) const {
  if (hessian_) return hessian_(x);
  return Matrix::Zero(dim_, dim_);
}

ConstraintList interval_constraints(Index dim, Index coordinate, double lower, double upper) {
  if (!(lower < upper)) throw std::invalid_argument("interval constraint: lower must be below upper");
  Vector e = Vector::Zero(dim);
  e(coordinate) = 1.0;
  return {std::make_shared<AffineConstraint>(-e, -lower), std::make_shared<AffineConstraint>(e, upper)};
}

ConstraintList lower_bound_constraints(const Vector& lower) {
  ConstraintList out;
  for (Index k = 0; k < lower.size(); ++k) {
    Vector e = Vector::Zero(lower.size());
    e(k) = -1.0;
    out.push_back(std::make_shared<AffineConstraint>(e, -lower(k)));
  }
  return out;
}

}  // namespace dfm
