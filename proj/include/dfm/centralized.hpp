#pragma once

#include "dfm/problem.hpp"

namespace dfm {

struct CentralizedOptions {
  /// Stationarity tolerance, relative to 1 + ||gradient at the start||_inf.
  double tolerance = 1e-12;
  int max_iterations = 500;
};

struct CentralizedSolution {
  Allocation x;
  ObjectiveValue value;
  double stationarity = 0;
  int iterations = 0;
  bool converged = false;
};

/// Reference solve of min f + rho B s.t. Ax = c by damped Newton over the whole stacked vector.
/// Blocks whose cost Hessian is unavailable or indefinite use L_i I instead.
CentralizedSolution solve_barrier_problem(const ProblemSpec& spec, const Allocation& start,
                                          const CentralizedOptions& options = {});

/// Strictly feasible point from minimizing the largest constraint value over Ax = c.
/// Throws InfeasibleStartError when no strictly interior point is found.
Allocation phase_one(const ProblemSpec& spec);

}  // namespace dfm
