#include "dfm/local_solver.hpp"

#include "dfm/barrier.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfm {

namespace {

constexpr double kBoundaryFraction = 0.99;
// Beyond this distance the usable step is already capped at 1.
constexpr double kSearchHorizon = 1.0 / kBoundaryFraction;

double affine_hit(const Constraint& g, const Vector& x, const Vector& d) {
  const double slope = g.gradient(x).dot(d);
  if (slope <= 0) return std::numeric_limits<double>::infinity();
  return -g.value(x) / slope;
}

double bisect_hit(const Constraint& g, const Vector& x, const Vector& d) {
  if (g.value(x + kSearchHorizon * d) < 0) return std::numeric_limits<double>::infinity();
  double lo = 0, hi = kSearchHorizon;
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (g.value(x + mid * d) < 0 ? lo : hi) = mid;
  }
  return lo;
}

/// Neighborhood subproblem of one owner as a smooth model over the stacked deltas.
class NeighborhoodModel : public SmoothBarrierModel {
 public:
  NeighborhoodModel(const ProblemSpec& spec, const std::vector<int>& members, const Allocation& snapshot)
      : spec_(spec), members_(members), snapshot_(snapshot) {
    Index at = 0;
    for (int j : members_) {
      const auto& node = spec_.nodes[static_cast<std::size_t>(j)];
      offsets_.push_back(at);
      at += node.dim;
      anchor_value_.push_back(node.cost->value(snapshot_.block(j)));
      anchor_gradient_.push_back(node.cost->gradient(snapshot_.block(j)));
    }
    size_ = at;
  }

  Index size() const { return size_; }

  Matrix equality_matrix() const {
    Matrix E(spec_.coupling_rows(), size_);
    for (std::size_t k = 0; k < members_.size(); ++k)
      E.middleCols(offsets_[k], node(k).dim) = node(k).coupling;
    return E;
  }

  double value(const Vector& z) const override {
    double total = 0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const auto& nd = node(k);
      const auto p = z.segment(offsets_[k], nd.dim);
      const Vector x = point(k, z);
      if (nd.margin(x) >= 0) return std::numeric_limits<double>::infinity();
      total += anchor_value_[k] + anchor_gradient_[k].dot(p) + 0.5 * nd.cost->smoothness() * p.squaredNorm();
      if (!nd.constraints.empty()) total += spec_.rho * barrier_value(nd, x);
    }
    return total;
  }

  Vector gradient(const Vector& z) const override {
    Vector g(size_);
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const auto& nd = node(k);
      Vector gk = anchor_gradient_[k] + nd.cost->smoothness() * z.segment(offsets_[k], nd.dim);
      if (!nd.constraints.empty()) gk += spec_.rho * barrier_gradient(nd, point(k, z));
      g.segment(offsets_[k], nd.dim) = gk;
    }
    return g;
  }

  Matrix hessian(const Vector& z) const override {
    Matrix H = Matrix::Zero(size_, size_);
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const auto& nd = node(k);
      auto block = H.block(offsets_[k], offsets_[k], nd.dim, nd.dim);
      block.diagonal().setConstant(nd.cost->smoothness());
      if (!nd.constraints.empty()) block += spec_.rho * barrier_eval(nd, point(k, z)).hessian;
    }
    return H;
  }

  double boundary_step(const Vector& z, const Vector& d) const override {
    double hit = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const auto& nd = node(k);
      if (nd.constraints.empty()) continue;
      hit = std::min(hit, boundary_distance(point(k, z), d.segment(offsets_[k], nd.dim), nd.constraints));
    }
    return hit;
  }

  BlockVector split(const Vector& z) const {
    BlockVector out;
    for (std::size_t k = 0; k < members_.size(); ++k) out.push_back(z.segment(offsets_[k], node(k).dim));
    return out;
  }

  Vector stack(const BlockVector& blocks) const {
    Vector z(size_);
    for (std::size_t k = 0; k < members_.size(); ++k) z.segment(offsets_[k], node(k).dim) = blocks[k];
    return z;
  }

 private:
  const NodeLocal& node(std::size_t k) const { return spec_.nodes[static_cast<std::size_t>(members_[k])]; }
  Vector point(std::size_t k, const Vector& z) const {
    return snapshot_.block(members_[k]) + z.segment(offsets_[k], node(k).dim);
  }

  const ProblemSpec& spec_;
  const std::vector<int>& members_;
  const Allocation& snapshot_;
  std::vector<Index> offsets_;
  std::vector<double> anchor_value_;
  BlockVector anchor_gradient_;
  Index size_ = 0;
};

}  // namespace

const Vector& ReallocationPlan::delta_for(int j) const {
  auto it = std::lower_bound(members.begin(), members.end(), j);
  if (it == members.end() || *it != j)
    throw std::out_of_range("node " + std::to_string(j) + " is not in the neighborhood of " + std::to_string(owner));
  return deltas[static_cast<std::size_t>(it - members.begin())];
}

double boundary_distance(const Vector& x, const Vector& d, const ConstraintList& constraints) {
  double hit = std::numeric_limits<double>::infinity();
  if (d.isZero(0.0)) return hit;
  for (const auto& g : constraints) hit = std::min(hit, g->is_affine() ? affine_hit(*g, x, d) : bisect_hit(*g, x, d));
  return hit;
}

StepCap fraction_to_boundary(const Vector& x, const Vector& d, const ConstraintList& constraints) {
  const double hit = boundary_distance(x, d, constraints);
  return {std::min(1.0, hit), std::min(1.0, kBoundaryFraction * hit)};
}

double subproblem_objective(const ProblemSpec& spec, int owner, const Allocation& snapshot, const BlockVector& deltas) {
  const auto members = spec.graph.closed_neighborhood(owner);
  NeighborhoodModel model(spec, members, snapshot);
  if (deltas.size() != members.size()) throw DimensionError("plan does not match the owner's neighborhood");
  return model.value(model.stack(deltas));
}

ReallocationPlan solve_subproblem(const ProblemSpec& spec, int owner, const Allocation& snapshot,
                                  const SubproblemOptions& options) {
  if (owner < 0 || owner >= spec.node_count()) throw std::out_of_range("owner index out of range");
  ReallocationPlan plan;
  plan.owner = owner;
  plan.members = spec.graph.closed_neighborhood(owner);
  NeighborhoodModel model(spec, plan.members, snapshot);
  const Matrix E = model.equality_matrix();

  NewtonOptions newton;
  newton.tolerance = options.tolerance;
  newton.max_iterations = options.max_iterations;
  newton.boundary_fraction = kBoundaryFraction;
  const Vector zero = Vector::Zero(model.size());
  plan.objective_at_zero = model.value(zero);
  NewtonResult result = minimize_on_affine_slice(model, E, zero, newton);

  plan.deltas = model.split(result.z);
  plan.objective = model.value(result.z);
  plan.iterations = result.iterations;
  plan.converged = result.converged;
  plan.equality_residual = E.rows() ? (E * result.z).lpNorm<Eigen::Infinity>() : 0.0;

  // Least-squares multiplier for grad = E^T v.
  const Vector g = model.gradient(result.z);
  if (E.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(E.transpose());
    plan.multiplier = cod.solve(g);
  } else {
    plan.multiplier = Vector();
  }
  const Vector stationarity = E.rows() ? Vector(g - E.transpose() * plan.multiplier) : g;
  const BlockVector per_block = model.split(stationarity);
  plan.kkt_residual = 0;
  for (const auto& b : per_block) plan.kkt_residual = std::max(plan.kkt_residual, b.norm());

  if (!plan.converged)
    throw SubproblemNotConverged("subproblem not converged for owner " + std::to_string(owner) + " (stationarity " +
                                     std::to_string(result.stationarity) + ")",
                                 std::move(plan));
  return plan;
}

}  // namespace dfm
