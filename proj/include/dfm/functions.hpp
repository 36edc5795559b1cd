#pragma once

#include "dfm/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dfm {

/// Local cost oracle f_i with its smoothness constant L_i. Implementations must be pure.
class CostFunction {
 public:
  virtual ~CostFunction() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// Exact Hessian when the family has a closed form.
  virtual std::optional<Matrix> hessian(const Vector& x) const = 0;
  /// L_i, a Lipschitz constant of the gradient.
  virtual double smoothness() const = 0;
  /// sigma_i, or 0 when the cost is not known to be strongly convex.
  virtual double strong_convexity() const { return 0.0; }
  /// A value known to be <= f on the whole space, when one exists in closed form.
  virtual std::optional<double> global_lower_bound() const { return std::nullopt; }
};

/// f(x) = 1/2 x^T Q x + b^T x + c with Q symmetric positive semidefinite.
class QuadraticCost : public CostFunction {
 public:
  /// `smoothness` overrides the default L = lambda_max(Q); it must not be smaller.
  QuadraticCost(Matrix Q, Vector b, double c, std::optional<double> smoothness = std::nullopt);

  /// 1/2 curvature (x - target)^2 in one dimension.
  static std::shared_ptr<const QuadraticCost> centered(double curvature, double target);
  /// a x^2 + b x + c in one dimension, the layout of a polynomial generator cost.
  static std::shared_ptr<const QuadraticCost> polynomial(double a, double b, double c);

  Index dim() const override { return b_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::optional<Matrix> hessian(const Vector&) const override { return Q_; }
  double smoothness() const override { return smoothness_; }
  double strong_convexity() const override { return strong_convexity_; }
  std::optional<double> global_lower_bound() const override;

  const Matrix& Q() const noexcept { return Q_; }
  const Vector& b() const noexcept { return b_; }
  double c() const noexcept { return c_; }

 private:
  Matrix Q_;
  Vector b_;
  double c_;
  double smoothness_;
  double strong_convexity_;
};

/// alpha (r + k - D)^2 + beta k^2 on the block x = (r, k): renewable and coal consumption.
class MultiResourceCost : public QuadraticCost {
 public:
  MultiResourceCost(double alpha, double beta, double demand);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double demand() const noexcept { return demand_; }

 private:
  double alpha_;
  double beta_;
  double demand_;
};

/// Negated sigmoidal utility acting on the first coordinate of a block:
/// f(x) = -(p / (1 + exp(-a (x_0 - b))) + q), with q chosen so that f(0) = 0.
class SigmoidCost : public CostFunction {
 public:
  SigmoidCost(Index dim, double a, double b, double p);

  Index dim() const override { return dim_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::optional<Matrix> hessian(const Vector& x) const override;
  /// Conservative p a^2 / 4.
  double smoothness() const override { return p_ * a_ * a_ / 4.0; }
  std::optional<double> global_lower_bound() const override { return -(p_ + q_); }

  double utility(double rate) const;
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }

 private:
  Index dim_;
  double a_, b_, p_, q_;
};

/// User-supplied oracle; L must be provided since it cannot be derived.
class CallbackCost : public CostFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  CallbackCost(Index dim, ValueFn value, GradientFn gradient, double smoothness, HessianFn hessian = {});

  Index dim() const override { return dim_; }
  double value(const Vector& x) const override { return value_(x); }
  Vector gradient(const Vector& x) const override { return gradient_(x); }
  std::optional<Matrix> hessian(const Vector& x) const override;
  double smoothness() const override { return smoothness_; }

 private:
  Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  double smoothness_;
};

/// Convex local constraint g(x) <= 0.
class Constraint {
 public:
  virtual ~Constraint() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;
  virtual bool is_affine() const { return false; }
  /// False when hessian() is a Gauss-Newton surrogate (zero) rather than the true curvature.
  virtual bool exact_hessian() const { return true; }
};

/// g(x) = a^T x - b.
class AffineConstraint : public Constraint {
 public:
  AffineConstraint(Vector a, double b);

  Index dim() const override { return a_.size(); }
  double value(const Vector& x) const override { return a_.dot(x) - b_; }
  Vector gradient(const Vector&) const override { return a_; }
  Matrix hessian(const Vector&) const override { return Matrix::Zero(dim(), dim()); }
  bool is_affine() const override { return true; }

  const Vector& a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

 private:
  Vector a_;
  double b_;
};

/// g(x) = 1/2 x^T P x + q^T x + r with P symmetric positive semidefinite.
class QuadraticConstraint : public Constraint {
 public:
  QuadraticConstraint(Matrix P, Vector q, double r);

  Index dim() const override { return q_.size(); }
  double value(const Vector& x) const override { return 0.5 * x.dot(P_ * x) + q_.dot(x) + r_; }
  Vector gradient(const Vector& x) const override { return P_ * x + q_; }
  Matrix hessian(const Vector&) const override { return P_; }

  const Matrix& P() const noexcept { return P_; }
  const Vector& q() const noexcept { return q_; }
  double r() const noexcept { return r_; }

 private:
  Matrix P_;
  Vector q_;
  double r_;
};

class CallbackConstraint : public Constraint {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  CallbackConstraint(Index dim, ValueFn value, GradientFn gradient, HessianFn hessian = {});

  Index dim() const override { return dim_; }
  double value(const Vector& x) const override { return value_(x); }
  Vector gradient(const Vector& x) const override { return gradient_(x); }
  Matrix hessian(const Vector& x) const override;
  bool exact_hessian() const override { return static_cast<bool>(hessian_); }

 private:
  Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

using CostPtr = std::shared_ptr<const CostFunction>;
using ConstraintPtr = std::shared_ptr<const Constraint>;
using ConstraintList = std::vector<ConstraintPtr>;

/// lower <= x_k <= upper on coordinate k of a `dim`-block, as two affine constraints (lower first).
ConstraintList interval_constraints(Index dim, Index coordinate, double lower, double upper);
/// x >= lower componentwise.
ConstraintList lower_bound_constraints(const Vector& lower);

}  // namespace dfm
