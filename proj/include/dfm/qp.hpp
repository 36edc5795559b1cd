#pragma once

#include "dfm/types.hpp"

namespace dfm {

struct QpResult {
  Vector z;
  /// Multipliers of the inequality rows at the solution (zero for inactive rows).
  Vector inequality_multipliers;
  int iterations = 0;
  bool converged = false;
};

/// min 1/2 z^T H z + g^T z  s.t.  E z = 0, G z <= h, with H positive definite.
/// Primal active-set method from the feasible point z0; small dense problems only.
QpResult solve_active_set_qp(const Matrix& H, const Vector& g, const Matrix& E, const Matrix& G, const Vector& h,
                             Vector z0, int max_iterations = 200);

}  // namespace dfm
