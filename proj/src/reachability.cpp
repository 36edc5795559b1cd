#include "dfm/reachability.hpp"

#include "dfm/errors.hpp"
#include "dfm/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace dfm {

SubspaceBasis local_subspace_basis(const ProblemSpec& spec, int owner) {
  const auto members = spec.graph.closed_neighborhood(owner);
  const auto offsets = spec.offsets();
  Index local = 0;
  for (int j : members) local += spec.nodes[static_cast<std::size_t>(j)].dim;

  Matrix A_local(spec.coupling_rows(), local);
  Index at = 0;
  for (int j : members) {
    const auto& node = spec.nodes[static_cast<std::size_t>(j)];
    A_local.middleCols(at, node.dim) = node.coupling;
    at += node.dim;
  }
  const Matrix Z = null_space_basis(A_local);

  SubspaceBasis out;
  out.owner = owner;
  out.basis = Matrix::Zero(spec.total_dim(), Z.cols());
  at = 0;
  for (int j : members) {
    const Index d = spec.nodes[static_cast<std::size_t>(j)].dim;
    out.basis.middleRows(offsets[static_cast<std::size_t>(j)], d) = Z.middleRows(at, d);
    at += d;
  }
  return out;
}

ReachabilityReport check_reachability(const ProblemSpec& spec) {
  const Matrix A = spec.coupling_matrix();
  const Index N = spec.total_dim();
  const double scale = std::max(1.0, A.norm());

  std::vector<Matrix> bases;
  Index columns = 0;
  ReachabilityReport report;
  for (int i = 0; i < spec.node_count(); ++i) {
    Matrix U = local_subspace_basis(spec, i).basis;
    if (U.cols() > 0 && (A * U).norm() > 1e-10 * scale) report.subspaces_in_null = false;
    columns += U.cols();
    bases.push_back(std::move(U));
  }
  Matrix all(N, columns);
  Index at = 0;
  for (const auto& U : bases) {
    all.middleCols(at, U.cols()) = U;
    at += U.cols();
  }
  report.dim_sum = numerical_rank(all);
  report.dim_null_A = N - numerical_rank(A);
  report.holds = report.dim_sum == report.dim_null_A && report.subspaces_in_null;
  return report;
}

Lemma1Verdict check_lemma1_shortcut(const ProblemSpec& spec) {
  if (spec.family == ProblemFamily::rate_control && !spec.link_users.empty()) {
    if (static_cast<Index>(spec.link_users.size()) != spec.coupling_rows())
      return {false, "link user lists do not match the coupling rows"};
    for (std::size_t l = 0; l < spec.link_users.size(); ++l) {
      const auto& users = spec.link_users[l];
      for (std::size_t a = 0; a < users.size(); ++a)
        for (std::size_t b = a + 1; b < users.size(); ++b)
          if (!spec.graph.has_edge(users[a], users[b]))
            return {false, "transmitters " + std::to_string(users[a]) + " and " + std::to_string(users[b]) +
                               " share link " + std::to_string(l) + " but are not neighbors"};
    }
    return {true, "rate-control coupling with transmitters sharing a link as neighbors"};
  }
  if (!spec.graph.is_connected()) return {false, "graph is not connected"};
  for (int i = 0; i < spec.node_count(); ++i) {
    const Matrix& Ai = spec.nodes[static_cast<std::size_t>(i)].coupling;
    if (numerical_rank(Ai) != spec.coupling_rows())
      return {false, "A_" + std::to_string(i) + " lacks full row rank"};
  }
  return {true, "every A_i has full row rank and the graph is connected"};
}

WeightingMatrix weighting_matrix(const ProblemSpec& spec, const StepSizes& eta, Index dense_cap) {
  const Index N = spec.total_dim();
  if (N > dense_cap)
    throw DiagnosticsUnavailable("diagnostics unavailable at this size (N = " + std::to_string(N) + ")");
  WeightingMatrix out;
  out.W = Matrix::Zero(N, N);
  for (int i = 0; i < spec.node_count(); ++i) {
    const Matrix U = local_subspace_basis(spec, i).basis;
    if (U.cols() > 0) out.W.noalias() += eta[i] * (U * U.transpose());
  }
  out.W = 0.5 * (out.W + out.W.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.W, Eigen::EigenvaluesOnly);
  out.rank = 0;
  out.lambda_min_nonzero = 0;
  for (Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const double lambda = eig.eigenvalues()(k);
    if (lambda > 1e-9) {
      if (out.rank == 0) out.lambda_min_nonzero = lambda;
      ++out.rank;
    }
  }
  const Matrix A = spec.coupling_matrix();
  const bool annihilates = A.rows() == 0 || (out.W * A.transpose()).norm() <= 1e-9 * std::max(1.0, A.norm());
  out.null_space_matches = annihilates && out.rank + numerical_rank(A) == N;
  return out;
}

}  // namespace dfm
