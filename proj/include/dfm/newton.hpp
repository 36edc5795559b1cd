#pragma once

#include "dfm/types.hpp"

namespace dfm {

/// Solution of [H E^T; E -delta I] [d; w] = [-g; 0] and the Newton decrement sqrt(d^T H d).
struct KktStep {
  Vector direction;
  Vector multiplier;
  double decrement = 0;
  bool regularized = false;
};

/// Equality-constrained Newton step for the model 1/2 d^T H d + g^T d subject to E d = 0.
/// Throws RankDeficientCoupling when the KKT matrix is singular and `regularization` is zero;
/// with a positive regularization the system is perturbed and the direction is projected back onto Null(E).
KktStep newton_kkt_step(const Matrix& H, const Vector& gradient, const Matrix& E, double regularization = 0.0);

/// Step cap that keeps x + step * d strictly inside {g < 0}.
struct StepCap {
  /// Largest alpha in (0, 1] with x + alpha d inside the closure of the region (capped at 1).
  double alpha_max = 1;
  /// min(1, 0.99 * boundary distance): the step actually usable.
  double usable = 1;
};

/// Twice-differentiable objective on an open convex domain, minimized over an affine slice.
class SmoothBarrierModel {
 public:
  virtual ~SmoothBarrierModel() = default;
  virtual double value(const Vector& z) const = 0;
  virtual Vector gradient(const Vector& z) const = 0;
  virtual Matrix hessian(const Vector& z) const = 0;
  /// Distance along d (in units of d) to the domain boundary; +infinity when never reached.
  virtual double boundary_step(const Vector& z, const Vector& d) const = 0;
};

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
  double armijo = 0.25;
  double boundary_fraction = 0.99;
};

struct NewtonResult {
  Vector z;
  /// Projected gradient norm ||g - E^T v||_inf at z, v the least-squares multiplier.
  double stationarity = 0;
  /// tolerance * (1 + ||g(z0)||_inf), the threshold stationarity was tested against.
  double scaled_tolerance = 0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton from a strictly interior z0, keeping E (z - z0) = 0 exactly up to rounding.
/// Every accepted step satisfies the Armijo condition, so the objective never increases.
NewtonResult minimize_on_affine_slice(const SmoothBarrierModel& model, const Matrix& E, Vector z0,
                                      const NewtonOptions& options = {});

}  // namespace dfm
