#include "dfm/centralized.hpp"

#include "dfm/barrier.hpp"
#include "dfm/errors.hpp"
#include "dfm/linalg.hpp"
#include "dfm/local_solver.hpp"
#include "dfm/newton.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace dfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class FullModel : public SmoothBarrierModel {
 public:
  explicit FullModel(const ProblemSpec& spec) : spec_(spec), offsets_(spec.offsets()) {}

  double value(const Vector& z) const override {
    double total = 0;
    for (int i = 0; i < spec_.node_count(); ++i) {
      const auto& nd = node(i);
      const Vector x = block(i, z);
      if (nd.margin(x) >= 0) return kInf;
      total += nd.cost->value(x);
      if (!nd.constraints.empty()) total += spec_.rho * barrier_value(nd, x);
    }
    return total;
  }

  Vector gradient(const Vector& z) const override {
    Vector g(z.size());
    for (int i = 0; i < spec_.node_count(); ++i) {
      const auto& nd = node(i);
      const Vector x = block(i, z);
      Vector gi = nd.cost->gradient(x);
      if (!nd.constraints.empty()) gi += spec_.rho * barrier_gradient(nd, x);
      g.segment(offset(i), nd.dim) = gi;
    }
    return g;
  }

  Matrix hessian(const Vector& z) const override {
    Matrix H = Matrix::Zero(z.size(), z.size());
    for (int i = 0; i < spec_.node_count(); ++i) {
      const auto& nd = node(i);
      const Vector x = block(i, z);
      auto Hi = H.block(offset(i), offset(i), nd.dim, nd.dim);
      const std::optional<Matrix> curvature = nd.cost->hessian(x);
      if (curvature && Eigen::SelfAdjointEigenSolver<Matrix>(*curvature, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff() >= 0) {
        Hi = *curvature;
      } else {
        Hi.diagonal().setConstant(nd.cost->smoothness());
      }
      if (!nd.constraints.empty()) Hi += spec_.rho * barrier_eval(nd, x).hessian;
    }
    return H;
  }

  double boundary_step(const Vector& z, const Vector& d) const override {
    double hit = kInf;
    for (int i = 0; i < spec_.node_count(); ++i) {
      const auto& nd = node(i);
      if (nd.constraints.empty()) continue;
      hit = std::min(hit, boundary_distance(block(i, z), d.segment(offset(i), nd.dim), nd.constraints));
    }
    return hit;
  }

 private:
  const NodeLocal& node(int i) const { return spec_.nodes[static_cast<std::size_t>(i)]; }
  Index offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
  Vector block(int i, const Vector& z) const { return z.segment(offset(i), node(i).dim); }

  const ProblemSpec& spec_;
  std::vector<Index> offsets_;
};

/// t + mu sum 1 / (t - g(x)) over z = (x, t); every g - t < 0 in the domain.
class PhaseOneModel : public SmoothBarrierModel {
 public:
  PhaseOneModel(const ProblemSpec& spec, double mu) : spec_(spec), offsets_(spec.offsets()), mu_(mu) {
    size_ = spec.total_dim() + 1;
  }

  double value(const Vector& z) const override {
    const double t = z(size_ - 1);
    double total = t;
    for (int i = 0; i < spec_.node_count(); ++i) {
      const Vector x = block(i, z);
      for (const auto& g : node(i).constraints) {
        const double h = g->value(x) - t;
        if (h >= 0) return kInf;
        total += mu_ / -h;
      }
    }
    return total;
  }

  Vector gradient(const Vector& z) const override {
    const double t = z(size_ - 1);
    Vector grad = Vector::Zero(size_);
    grad(size_ - 1) = 1;
    for (int i = 0; i < spec_.node_count(); ++i) {
      const Vector x = block(i, z);
      for (const auto& g : node(i).constraints) {
        const double h = g->value(x) - t;
        grad.segment(offset(i), node(i).dim) += mu_ * g->gradient(x) / (h * h);
        grad(size_ - 1) -= mu_ / (h * h);
      }
    }
    return grad;
  }

  Matrix hessian(const Vector& z) const override {
    const double t = z(size_ - 1);
    Matrix H = Matrix::Zero(size_, size_);
    for (int i = 0; i < spec_.node_count(); ++i) {
      const Vector x = block(i, z);
      const Index d = node(i).dim;
      for (const auto& g : node(i).constraints) {
        const double h = g->value(x) - t;
        Vector grad_h(d + 1);
        grad_h << g->gradient(x), -1.0;
        Matrix local = -2.0 * grad_h * grad_h.transpose() / (h * h * h);
        local.topLeftCorner(d, d) += g->hessian(x) / (h * h);
        // Scatter the (x_i, t) block.
        H.block(offset(i), offset(i), d, d) += mu_ * local.topLeftCorner(d, d);
        H.block(offset(i), size_ - 1, d, 1) += mu_ * local.topRightCorner(d, 1);
        H.block(size_ - 1, offset(i), 1, d) += mu_ * local.bottomLeftCorner(1, d);
        H(size_ - 1, size_ - 1) += mu_ * local(d, d);
      }
    }
    return H;
  }

  double boundary_step(const Vector& z, const Vector& d) const override {
    const double t = z(size_ - 1);
    const double dt = d(size_ - 1);
    double hit = kInf;
    for (int i = 0; i < spec_.node_count(); ++i) {
      const Vector x = block(i, z);
      const Vector dx = d.segment(offset(i), node(i).dim);
      for (const auto& g : node(i).constraints) {
        if (g->is_affine()) {
          const double slope = g->gradient(x).dot(dx) - dt;
          if (slope > 0) hit = std::min(hit, -(g->value(x) - t) / slope);
          continue;
        }
        auto inside = [&](double s) { return g->value(x + s * dx) - (t + s * dt) < 0; };
        const double horizon = 1.0 / 0.99;
        if (inside(horizon)) continue;
        double lo = 0, hi = horizon;
        for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
          const double mid = 0.5 * (lo + hi);
          (inside(mid) ? lo : hi) = mid;
        }
        hit = std::min(hit, lo);
      }
    }
    return hit;
  }

 private:
  const NodeLocal& node(int i) const { return spec_.nodes[static_cast<std::size_t>(i)]; }
  Index offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
  Vector block(int i, const Vector& z) const { return z.segment(offset(i), node(i).dim); }

  const ProblemSpec& spec_;
  std::vector<Index> offsets_;
  double mu_;
  Index size_;
};

}  // namespace

CentralizedSolution solve_barrier_problem(const ProblemSpec& spec, const Allocation& start,
                                          const CentralizedOptions& options) {
  if (spec.has_barriers() && !(start.interior_margin() < 0))
    throw InfeasibleStartError("centralized solve needs a strictly interior start");
  const FullModel model(spec);
  NewtonOptions newton;
  newton.tolerance = options.tolerance;
  newton.max_iterations = options.max_iterations;
  NewtonResult r = minimize_on_affine_slice(model, spec.coupling_matrix(), start.stacked(), newton);
  Allocation x = Allocation::from_stacked(spec, r.z);
  const ObjectiveValue value = evaluate_objective(spec, x);
  return {std::move(x), value, r.stationarity, r.iterations, r.converged};
}

Allocation phase_one(const ProblemSpec& spec) {
  const Matrix A = spec.coupling_matrix();
  const Vector x_ls = pseudo_inverse(A) * spec.rhs;
  if ((A * x_ls - spec.rhs).lpNorm<Eigen::Infinity>() > kFeasibilityTolerance * (1.0 + spec.rhs.lpNorm<Eigen::Infinity>()))
    throw InfeasibleStartError("no strictly feasible point: the coupling constraint Ax = c is inconsistent");
  const Allocation start = Allocation::from_stacked(spec, x_ls);
  if (!spec.has_barriers() || start.interior_margin() < -1e-6) return start;

  const Index N = spec.total_dim();
  Vector z(N + 1);
  z << x_ls, start.interior_margin() + 1.0;
  Matrix E = Matrix::Zero(A.rows(), N + 1);
  E.leftCols(N) = A;

  // Follow the central path until the margin is comfortably negative or has settled.
  std::optional<Allocation> best;
  for (double mu = 1.0; mu >= 1e-10; mu *= 0.1) {
    const PhaseOneModel model(spec, mu);
    NewtonOptions opts;
    opts.max_iterations = 200;
    opts.tolerance = 1e-9;
    z = minimize_on_affine_slice(model, E, z, opts).z;
    Allocation candidate = Allocation::from_stacked(spec, z.head(N));
    if (candidate.residual_norm() > kFeasibilityTolerance || !(candidate.interior_margin() < 0)) continue;
    const bool settled = mu <= 1e-6 || candidate.interior_margin() <= -1.0;
    if (!best || candidate.interior_margin() < best->interior_margin()) best = std::move(candidate);
    if (settled) break;
  }
  if (best && best->interior_margin() <= -kInteriorTolerance) return *best;
  throw InfeasibleStartError("no strictly feasible point found: the local sets have no common interior point on Ax = c");
}

}  // namespace dfm
