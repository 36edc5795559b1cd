#include "dfm/newton.hpp"

#include "dfm/errors.hpp"
#include "dfm/linalg.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace dfm {

namespace {
// Squared Newton decrement, relative to 1 + |phi|, below which the objective can no longer resolve progress.
constexpr double kLocalDecrement = 1e-12;
}  // namespace

KktStep newton_kkt_step(const Matrix& H, const Vector& gradient, const Matrix& E, double regularization) {
  const Index n = H.rows();
  const Index m = E.rows();
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, m) = E.transpose();
  K.bottomLeftCorner(m, n) = E;
  K.bottomRightCorner(m, m).diagonal().setConstant(-regularization);
  Vector rhs = Vector::Zero(n + m);
  rhs.head(n) = -gradient;

  Eigen::FullPivLU<Matrix> lu(K);
  if (regularization == 0.0 && !lu.isInvertible())
    throw RankDeficientCoupling("rank-deficient coupling: KKT matrix is singular");
  const Vector sol = lu.solve(rhs);

  KktStep step;
  step.direction = sol.head(n);
  step.multiplier = sol.tail(m);
  step.regularized = regularization != 0.0;
  if (step.regularized && m > 0) {
    const Matrix Z = null_space_basis(E);
    step.direction = Z * (Z.transpose() * step.direction);
  }
  step.decrement = std::sqrt(std::max(0.0, step.direction.dot(H * step.direction)));
  return step;
}

NewtonResult minimize_on_affine_slice(const SmoothBarrierModel& model, const Matrix& E, Vector z0,
                                      const NewtonOptions& options) {
  const Matrix R = row_space_rows(E);
  auto project = [&R](const Vector& v) -> Vector {
    if (R.rows() == 0) return v;
    return v - R.transpose() * (R * v);
  };

  NewtonResult result;
  Vector z = z0;
  double phi = model.value(z);
  Vector g = model.gradient(z);
  result.scaled_tolerance = options.tolerance * (1.0 + g.lpNorm<Eigen::Infinity>());
  double decrement_sq = std::numeric_limits<double>::infinity();
  bool stalled = false;
  int stagnant = 0;

  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector r = project(g);
    if (r.lpNorm<Eigen::Infinity>() <= result.scaled_tolerance) break;

    const Matrix H = model.hessian(z);
    KktStep step;
    try {
      step = newton_kkt_step(H, g, R);
    } catch (const RankDeficientCoupling&) {
      step = newton_kkt_step(H, g, R, 1e-10);
    }
    Vector d = project(step.direction);
    double slope = g.dot(d);
    if (!(slope < 0)) {
      d = -r;
      slope = g.dot(d);
    }
    decrement_sq = -slope;

    const double hit = model.boundary_step(z, d);
    double alpha = std::min(1.0, options.boundary_fraction * hit);
    Vector trial = z + alpha * d;
    double phi_trial = model.value(trial);
    // Inside the quadratic region the predicted decrease is below the rounding level of phi,
    // so the Armijo test carries no information: take the (boundary-capped) Newton step.
    const bool local = decrement_sq <= kLocalDecrement * (1.0 + std::abs(phi));
    if (!(local && std::isfinite(phi_trial))) {
      while (!(phi_trial <= phi + options.armijo * alpha * slope)) {
        alpha *= 0.5;
        if (alpha < 1e-20) {
          stalled = true;
          break;
        }
        trial = z + alpha * d;
        phi_trial = model.value(trial);
      }
    }
    result.iterations = it + 1;
    if (stalled) break;
    z = std::move(trial);
    phi = phi_trial;
    g = model.gradient(z);
    if (local) {
      const double r_next = project(g).lpNorm<Eigen::Infinity>();
      stagnant = r_next >= 0.5 * r.lpNorm<Eigen::Infinity>() ? stagnant + 1 : 0;
      if (stagnant >= 3) break;
    }
  }

  // Remove accumulated drift off the affine slice.
  const Vector cleaned = z0 + project(z - z0);
  if (std::isfinite(model.value(cleaned)) && model.value(cleaned) <= phi + 1e-14 * (1.0 + std::abs(phi))) {
    z = cleaned;
    g = model.gradient(z);
  }
  result.stationarity = project(g).lpNorm<Eigen::Infinity>();
  // Rounding can leave the projected gradient above tolerance at a point Newton cannot improve.
  result.converged = result.stationarity <= result.scaled_tolerance ||
                     ((stalled || stagnant >= 3) && decrement_sq <= kLocalDecrement * (1.0 + std::abs(phi)));
  result.z = std::move(z);
  return result;
}

}  // namespace dfm
