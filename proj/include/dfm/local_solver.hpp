#pragma once

#include "dfm/errors.hpp"
#include "dfm/newton.hpp"
#include "dfm/problem.hpp"

#include <vector>

namespace dfm {

/// Owner i's proposed changes p_ij for every j in its closed neighborhood.
struct ReallocationPlan {
  int owner = -1;
  /// Closed neighborhood of the owner, ascending; `deltas` is aligned with it.
  std::vector<int> members;
  BlockVector deltas;
  /// v_i with grad phi_j(x_j + p_ij) = A_j^T v_i at the solution.
  Vector multiplier;
  /// max_j ||grad phi_j(x_j + p_ij) - A_j^T v_i||.
  double kkt_residual = 0;
  /// ||sum_j A_j p_ij||_inf.
  double equality_residual = 0;
  /// Subproblem objective at p = 0 and at the returned plan.
  double objective_at_zero = 0;
  double objective = 0;
  int iterations = 0;
  bool converged = false;

  /// p_ij; throws std::out_of_range when j is not in the owner's neighborhood.
  const Vector& delta_for(int j) const;
};

class SubproblemNotConverged : public Error {
 public:
  SubproblemNotConverged(const std::string& message, ReallocationPlan best)
      : Error(message), best_(std::move(best)) {}

  /// Best plan found; it still satisfies the equality and interiority invariants.
  const ReallocationPlan& best_plan() const noexcept { return best_; }

 private:
  ReallocationPlan best_;
};

struct SubproblemOptions {
  /// Stationarity tolerance, relative to 1 + ||gradient at p = 0||_inf.
  double tolerance = 1e-10;
  int max_iterations = 100;
};

/// Minimizes sum_{j in closed nbhd} f_j^k(x_j + p_j) + rho B_j(x_j + p_j) subject to sum_j A_j p_j = 0,
/// warm-started from p = 0. Throws SubproblemNotConverged when the iteration cap is hit first.
ReallocationPlan solve_subproblem(const ProblemSpec& spec, int owner, const Allocation& snapshot,
                                  const SubproblemOptions& options = {});

/// Subproblem objective sum_j phi_j^k(x_j + p_j) for an arbitrary candidate aligned with the owner's members.
double subproblem_objective(const ProblemSpec& spec, int owner, const Allocation& snapshot, const BlockVector& deltas);

/// Distance along d to the boundary of {g < 0}: exact for affine g, bisection otherwise.
double boundary_distance(const Vector& x, const Vector& d, const ConstraintList& constraints);
StepCap fraction_to_boundary(const Vector& x, const Vector& d, const ConstraintList& constraints);

}  // namespace dfm
