#pragma once

#include "dfm/problem.hpp"
#include "dfm/step_sizes.hpp"

#include <string>

namespace dfm {

/// Orthonormal basis of S_i: directions supported on the closed neighborhood of `owner`
/// that leave sum_j A_j x_j unchanged, embedded in R^N.
struct SubspaceBasis {
  int owner = -1;
  Matrix basis;

  Index dim() const noexcept { return basis.cols(); }
  /// P_i = U U^T.
  Matrix projector() const { return basis * basis.transpose(); }
};

SubspaceBasis local_subspace_basis(const ProblemSpec& spec, int owner);

struct ReachabilityReport {
  /// dim(S_1 + ... + S_n) == dim Null(A).
  bool holds = false;
  Index dim_sum = 0;
  Index dim_null_A = 0;
  /// Every S_i lies in Null(A) to 1e-10.
  bool subspaces_in_null = true;
};

ReachabilityReport check_reachability(const ProblemSpec& spec);

struct Lemma1Verdict {
  bool applies = false;
  std::string reason;
};

/// Sufficient conditions for reachability: full-row-rank blocks on a connected graph,
/// or a rate-control coupling whose transmitters sharing a link are neighbors.
Lemma1Verdict check_lemma1_shortcut(const ProblemSpec& spec);

inline constexpr Index kDenseDiagnosticsCap = 2000;

struct WeightingMatrix {
  Matrix W;
  /// Smallest eigenvalue strictly above 1e-9 (0 when W = 0).
  double lambda_min_nonzero = 0;
  Index rank = 0;
  /// Null(W) = Range(A^T), checked by W A^T = 0 and rank(W) + rank(A) = N.
  bool null_space_matches = false;
};

/// W = sum_i eta_i P_i. Throws DiagnosticsUnavailable when N exceeds `dense_cap`.
WeightingMatrix weighting_matrix(const ProblemSpec& spec, const StepSizes& eta, Index dense_cap = kDenseDiagnosticsCap);

}  // namespace dfm
