#pragma once

#include "dfm/functions.hpp"
#include "dfm/graph.hpp"
#include "dfm/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dfm {

/// Instance families the benchmark generators know how to initialize directly.
enum class ProblemFamily { generic, dispatch, multi_resource, rate_control };

std::string to_string(ProblemFamily family);
ProblemFamily family_from_string(const std::string& name);

/// One node's private data: cost f_i, local constraints g_i^j and coupling block A_i (m x d_i).
struct NodeLocal {
  Index dim = 0;
  CostPtr cost;
  ConstraintList constraints;
  Matrix coupling;

  int constraint_count() const noexcept { return static_cast<int>(constraints.size()); }
  /// max_j g_i^j(x), or -infinity without constraints.
  double margin(const Vector& x) const;
};

/// minimize sum_i f_i(x_i) + rho B_i(x_i) subject to sum_i A_i x_i = c over the strict interiors.
struct ProblemSpec {
  Graph graph;
  std::vector<NodeLocal> nodes;
  Vector rhs;
  double rho = 1.0;
  /// Smoothness and Lipschitz constants of the constraint functions, when known.
  std::optional<double> beta;
  std::optional<double> beta1;
  /// Some f_lower <= f*, used for the step-independent bounds.
  std::optional<double> f_lower;
  ProblemFamily family = ProblemFamily::generic;
  /// Rate-control instances: the transmitters crossing each link (T_l), one entry per coupling row.
  std::vector<std::vector<int>> link_users;

  int node_count() const noexcept { return static_cast<int>(nodes.size()); }
  Index coupling_rows() const noexcept { return rhs.size(); }
  /// N = sum_i d_i.
  Index total_dim() const;
  /// Start of each block in the stacked vector, plus a final entry equal to N.
  std::vector<Index> offsets() const;
  /// A = [A_1, ..., A_n].
  Matrix coupling_matrix() const;
  int max_constraint_count() const;
  double max_smoothness() const;
  bool has_barriers() const { return max_constraint_count() > 0; }
};

enum class Severity { warning, error };

struct ValidationIssue {
  Severity severity;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const;
  bool has_warnings() const;
  bool mentions(const std::string& fragment) const;
};

/// Structural checks only; never throws.
ValidationReport validate_problem(const ProblemSpec& spec);

/// The stacked iterate together with its feasibility metadata, recomputed on construction.
class Allocation {
 public:
  Allocation(const ProblemSpec& spec, BlockVector blocks);
  static Allocation from_stacked(const ProblemSpec& spec, const Vector& stacked);

  const BlockVector& blocks() const noexcept { return blocks_; }
  const Vector& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  Vector stacked() const;
  /// A x - c.
  const Vector& residual() const noexcept { return residual_; }
  double residual_norm() const;
  /// max over i, j of g_i^j(x_i); negative iff strictly interior.
  double interior_margin() const noexcept { return interior_margin_; }
  bool feasible(double tolerance = kFeasibilityTolerance) const;

 private:
  BlockVector blocks_;
  Vector residual_;
  double interior_margin_;
};

/// sum_i A_i x_i - c. Throws DimensionError on block size mismatch.
Vector coupling_residual(const ProblemSpec& spec, const BlockVector& x);
inline Vector coupling_residual(const ProblemSpec& spec, const Allocation& x) { return coupling_residual(spec, x.blocks()); }

struct ObjectiveValue {
  double f = 0;
  double B = 0;
  double F = 0;
};

/// f, B and F = f + rho B. Throws BarrierDomainError off the strict interior when barriers are present.
ObjectiveValue evaluate_objective(const ProblemSpec& spec, const BlockVector& x);
inline ObjectiveValue evaluate_objective(const ProblemSpec& spec, const Allocation& x) {
  return evaluate_objective(spec, x.blocks());
}

/// Stacked gradient of F.
Vector objective_gradient(const ProblemSpec& spec, const BlockVector& x);

/// f_i(anchor) + <grad f_i(anchor), x - anchor> + L_i/2 ||x - anchor||^2.
double surrogate_value(const NodeLocal& node, const Vector& x, const Vector& anchor);

}  // namespace dfm
