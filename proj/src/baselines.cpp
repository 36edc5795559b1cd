#include "dfm/baselines.hpp"

#include "dfm/errors.hpp"
#include "dfm/linalg.hpp"
#include "dfm/newton.hpp"
#include "dfm/qp.hpp"

#include <algorithm>
#include <stdexcept>

namespace dfm {

EdgeWeights default_edge_weights(const Graph& graph) {
  EdgeWeights w;
  w.reserve(graph.edges().size());
  for (const auto& [i, j] : graph.edges())
    w.push_back(1.0 / static_cast<double>(std::max(graph.closed_degree(i), graph.closed_degree(j))));
  return w;
}

PairPlan solve_pair(const ProblemSpec& spec, const Allocation& state, const Edge& edge, bool constrained) {
  const auto& [i, j] = edge;
  const NodeLocal& a = spec.nodes.at(static_cast<std::size_t>(i));
  const NodeLocal& b = spec.nodes.at(static_cast<std::size_t>(j));
  const Index n = a.dim + b.dim;

  Matrix H = Matrix::Zero(n, n);
  H.diagonal().head(a.dim).setConstant(a.cost->smoothness());
  H.diagonal().tail(b.dim).setConstant(b.cost->smoothness());
  Vector g(n);
  g << a.cost->gradient(state.block(i)), b.cost->gradient(state.block(j));
  Matrix E(spec.coupling_rows(), n);
  E << a.coupling, b.coupling;
  const Matrix R = row_space_rows(E);

  Vector z;
  if (!constrained || (a.constraints.empty() && b.constraints.empty())) {
    z = newton_kkt_step(H, g, R).direction;
  } else {
    const Index rows = a.constraint_count() + b.constraint_count();
    Matrix G = Matrix::Zero(rows, n);
    Vector h(rows);
    Index r = 0;
    auto add_rows = [&](const NodeLocal& node, const Vector& x, Index offset) {
      for (const auto& c : node.constraints) {
        if (!c->is_affine())
          throw std::invalid_argument("constrained pairwise update supports affine local constraints only");
        const Vector normal = c->gradient(x);
        G.block(r, offset, 1, node.dim) = normal.transpose();
        h(r) = -c->value(x);
        ++r;
      }
    };
    add_rows(a, state.block(i), 0);
    add_rows(b, state.block(j), a.dim);
    h = h.cwiseMax(0.0);
    const QpResult qp = solve_active_set_qp(H, g, R, G, h, Vector::Zero(n));
    if (!qp.converged) throw Error("edge subproblem did not converge");
    z = qp.z;
  }
  return {edge, z.head(a.dim), z.tail(b.dim)};
}

Allocation pairwise_update(const ProblemSpec& spec, const Allocation& state, const EdgeWeights& weights,
                           bool constrained) {
  const auto& edges = spec.graph.edges();
  if (weights.size() != edges.size()) throw std::invalid_argument("edge weight count mismatch");
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w > 0); }))
    throw std::invalid_argument("edge weights must be positive");
  if (constrained) {
    std::vector<double> row_sum(static_cast<std::size_t>(spec.node_count()), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      row_sum[static_cast<std::size_t>(edges[e].first)] += weights[e];
      row_sum[static_cast<std::size_t>(edges[e].second)] += weights[e];
    }
    for (double s : row_sum)
      if (s > 1.0 + 1e-12) throw std::invalid_argument("edge weights of a node sum above 1");
  }

  BlockVector next = state.blocks();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const PairPlan plan = solve_pair(spec, state, edges[e], constrained);
    next[static_cast<std::size_t>(edges[e].first)] += weights[e] * plan.first_delta;
    next[static_cast<std::size_t>(edges[e].second)] += weights[e] * plan.second_delta;
  }
  return Allocation(spec, std::move(next));
}

RunResult run_pairwise(const ProblemSpec& spec, const Allocation& x0, int rounds, const EdgeWeights& weights,
                       bool constrained) {
  StepSizes eta = step_sizes(spec.graph);
  std::optional<WeightingMatrix> weighting;
  if (spec.total_dim() <= kDenseDiagnosticsCap) weighting = weighting_matrix(spec, eta);
  const Matrix* W = weighting ? &weighting->W : nullptr;

  RunResult result{Trace{}, x0, eta, weighting, false};
  result.trace.records.push_back(make_record(spec, 0, x0, W));
  for (int k = 0; k < rounds; ++k) {
    Allocation next = pairwise_update(spec, result.final_state, weights, constrained);
    TraceRecord record = make_record(spec, k + 1, next, W);
    result.trace.records.back().descent = result.trace.records.back().F - record.F;
    result.trace.records.push_back(record);
    result.final_state = std::move(next);
  }
  return result;
}

}  // namespace dfm
