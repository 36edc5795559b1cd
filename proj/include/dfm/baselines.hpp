#pragma once

#include "dfm/engine.hpp"
#include "dfm/problem.hpp"

#include <vector>

namespace dfm {

/// Changes proposed by the subproblem of one edge {first, second}.
struct PairPlan {
  Edge edge;
  /// Added to x_first; lies in R^{d_first}.
  Vector first_delta;
  /// Added to x_second.
  Vector second_delta;
};

/// One positive weight per edge, aligned with Graph::edges().
using EdgeWeights = std::vector<double>;

/// w_ij = 1 / max(|closed nbhd of i|, |closed nbhd of j|); every node's weights sum to at most 1.
EdgeWeights default_edge_weights(const Graph& graph);

/// min f_i^k(x_i + u) + f_j^k(x_j + v) s.t. A_i u + A_j v = 0, optionally keeping x_i + u and x_j + v
/// inside the (affine) local sets.
PairPlan solve_pair(const ProblemSpec& spec, const Allocation& state, const Edge& edge, bool constrained);

/// Edge-pairwise update: every node adds w_ij times the change its own edge subproblems assign to it.
/// Throws std::invalid_argument on a weight-count mismatch, non-positive weights, or (constrained)
/// a node whose weights sum above 1, or a non-affine local constraint in the constrained variant.
Allocation pairwise_update(const ProblemSpec& spec, const Allocation& state, const EdgeWeights& weights,
                           bool constrained);

/// Repeats pairwise_update for a number of rounds, recording the same metrics as the DFM driver.
RunResult run_pairwise(const ProblemSpec& spec, const Allocation& x0, int rounds, const EdgeWeights& weights,
                       bool constrained);

}  // namespace dfm
