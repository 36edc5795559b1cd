#pragma once

#include "dfm/matpower.hpp"
#include "dfm/problem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dfm {

/// Single-resource dispatch: one node per costed generator, x_i in [Pmin, Pmax], sum_i x_i = demand.
/// Throws std::invalid_argument unless sum Pmin < demand < sum Pmax, or when a cost is not strictly convex.
ProblemSpec gen_economic_dispatch(const CaseData& data, double demand);

enum class ResourceRole { consumer, renewable, coal };

struct MultiResourceNode {
  double alpha = 1;
  double beta = 1;
  double demand = 0;
  ResourceRole role = ResourceRole::consumer;
  /// Generation capacity u_i; ignored for consumers.
  double capacity = 0;
  bool operator==(const MultiResourceNode&) const = default;
};

/// Two resources per node (renewable, coal), A_i = I_2, c = 0, x_i >= lower bound set by the role.
/// Throws std::invalid_argument without at least one renewable and one coal generator.
ProblemSpec gen_multi_resource(const Graph& graph, const std::vector<MultiResourceNode>& nodes);

/// Seeded draw: generator nodes become renewable or coal with equal probability (at least one of each).
std::vector<MultiResourceNode> random_multi_resource_nodes(int n, int generators, std::uint64_t seed);

struct RateNetwork {
  std::vector<double> capacities;
  /// routes[i] lists the links crossed by transmitter i.
  std::vector<std::vector<int>> routes;
};

struct SigmoidParams {
  double a = 1;
  double b = 0;
  double p = 1;
  bool operator==(const SigmoidParams&) const = default;
};

/// Block of transmitter i: (x_i, y_il for l on its route, in route order). Local constraints x_i >= 0 and
/// x_i <= y_il; coupling rows sum_{i in T_l} y_il = c_l; transmitters sharing a link are neighbors.
ProblemSpec gen_rate_control(const RateNetwork& net, const std::vector<SigmoidParams>& utilities);

/// Four sources on a chain where consecutive sources share one link, each end source with a private link.
RateNetwork chain_rate_network();
/// a in [0.5, 2], b in [0.2, 0.8] * (smallest capacity on the route), p in [1, 3].
std::vector<SigmoidParams> random_sigmoid_params(const RateNetwork& net, std::uint64_t seed);

/// The two four-node counterexamples on the line 0-1-2-3 with targets (1, 0, 0, 1) and unit curvature.
/// 1: coupling x_0 + x_3 = 1, no local constraints. 2: sum x_i = 1 with x_i in [0, 1].
ProblemSpec example_problems(int which, bool add_edge_14);

/// A_i is column i of the graph Laplacian, c = 0, f_i = 1/2 (x - target_i)^2.
ProblemSpec gen_consensus(const Graph& graph, const Vector& targets);

/// Seeded random spanning tree plus each remaining pair with probability `extra_edge_probability`.
Graph random_connected_graph(int n, double extra_edge_probability, std::uint64_t seed);

/// Largest rho for which the barrier solution is within epsilon of optimal, given a strictly feasible x'.
double rho_for_accuracy(double epsilon, double f_at_xprime, double f_lower, double B_at_xprime);

/// Some f_lower <= f*: the sum of per-node minima over boxes or closed-form bounds, or a coarse grid.
std::optional<double> default_lower_bound(const ProblemSpec& spec);

/// Strictly feasible start: proportional box fill, the rate-control split, or a phase-1 solve.
/// Throws InfeasibleStartError when none exists.
Allocation feasible_initialization(const ProblemSpec& spec);

}  // namespace dfm
