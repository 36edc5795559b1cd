#include "dfm/benchmarks.hpp"

#include "dfm/barrier.hpp"
#include "dfm/centralized.hpp"
#include "dfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace dfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

/// Bounds implied by the affine constraints of a one-dimensional node; nullopt for anything else.
std::optional<Interval> scalar_box(const NodeLocal& node) {
  if (node.dim != 1) return std::nullopt;
  Interval box;
  for (const auto& g : node.constraints) {
    if (!g->is_affine()) return std::nullopt;
    const auto& affine = static_cast<const AffineConstraint&>(*g);
    const double a = affine.a()(0);
    if (a > 0)
      box.hi = std::min(box.hi, affine.b() / a);
    else if (a < 0)
      box.lo = std::max(box.lo, affine.b() / a);
  }
  return box;
}

Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

ProblemSpec gen_economic_dispatch(const CaseData& data, double demand) {
  if (data.gens.empty()) throw std::invalid_argument("no generators");
  double lo = 0, hi = 0;
  for (const auto& g : data.gens) {
    if (!(g.pmin < g.pmax)) throw std::invalid_argument("generator with Pmin >= Pmax");
    lo += g.pmin;
    hi += g.pmax;
  }
  if (!(lo < demand && demand < hi))
    throw std::invalid_argument("demand must lie strictly between total Pmin and total Pmax");

  ProblemSpec spec;
  spec.graph = derive_generator_graph(data);
  for (std::size_t k = 0; k < data.gens.size(); ++k) {
    const auto& cost = data.gencosts[k];
    if (!(cost.c2 > 0)) throw std::invalid_argument("generator cost must have a positive quadratic coefficient");
    NodeLocal node;
    node.dim = 1;
    node.cost = QuadraticCost::polynomial(cost.c2, cost.c1, cost.c0);
    node.constraints = interval_constraints(1, 0, data.gens[k].pmin, data.gens[k].pmax);
    node.coupling = scalar_matrix(1.0);
    spec.nodes.push_back(std::move(node));
  }
  spec.rhs = Vector::Constant(1, demand);
  spec.family = ProblemFamily::dispatch;
  spec.beta = 0.0;
  spec.beta1 = 1.0;
  spec.f_lower = default_lower_bound(spec);
  return spec;
}

ProblemSpec gen_multi_resource(const Graph& graph, const std::vector<MultiResourceNode>& nodes) {
  if (static_cast<int>(nodes.size()) != graph.node_count()) throw std::invalid_argument("node count mismatch");
  const bool renewable = std::any_of(nodes.begin(), nodes.end(), [](const auto& n) { return n.role == ResourceRole::renewable; });
  const bool coal = std::any_of(nodes.begin(), nodes.end(), [](const auto& n) { return n.role == ResourceRole::coal; });
  if (!renewable || !coal)
    throw std::invalid_argument("multi-resource instance needs at least one renewable and one coal generator");

  ProblemSpec spec;
  spec.graph = graph;
  for (const auto& p : nodes) {
    if (!(p.alpha > 0 && p.beta > 0)) throw std::invalid_argument("alpha and beta must be positive");
    Vector lower = Vector::Zero(2);
    if (p.role != ResourceRole::consumer) {
      if (!(p.capacity > 0)) throw std::invalid_argument("generator capacity must be positive");
      lower(p.role == ResourceRole::renewable ? 0 : 1) = -p.capacity;
    }
    NodeLocal node;
    node.dim = 2;
    node.cost = std::make_shared<MultiResourceCost>(p.alpha, p.beta, p.demand);
    node.constraints = lower_bound_constraints(lower);
    node.coupling = Matrix::Identity(2, 2);
    spec.nodes.push_back(std::move(node));
  }
  spec.rhs = Vector::Zero(2);
  spec.family = ProblemFamily::multi_resource;
  spec.beta = 0.0;
  spec.beta1 = 1.0;
  spec.f_lower = default_lower_bound(spec);
  return spec;
}

std::vector<MultiResourceNode> random_multi_resource_nodes(int n, int generators, std::uint64_t seed) {
  if (generators < 2 || generators > n) throw std::invalid_argument("need 2 <= generators <= n");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<MultiResourceNode> out(static_cast<std::size_t>(n));
  int renewables = 0;
  for (int i = 0; i < n; ++i) {
    auto& node = out[static_cast<std::size_t>(i)];
    node.alpha = uniform(0.5, 2.0);
    node.beta = uniform(0.1, 1.0);
    if (i < generators) {
      node.role = std::bernoulli_distribution(0.5)(rng) ? ResourceRole::renewable : ResourceRole::coal;
      node.capacity = uniform(10.0, 30.0);
      node.demand = 0.0;
      renewables += node.role == ResourceRole::renewable;
    } else {
      node.demand = uniform(1.0, 5.0);
    }
  }
  if (renewables == 0) out[0].role = ResourceRole::renewable;
  if (renewables == generators) out[0].role = ResourceRole::coal;
  return out;
}

ProblemSpec gen_rate_control(const RateNetwork& net, const std::vector<SigmoidParams>& utilities) {
  const int links = static_cast<int>(net.capacities.size());
  const int n = static_cast<int>(net.routes.size());
  if (static_cast<int>(utilities.size()) != n) throw std::invalid_argument("one utility per transmitter required");
  for (double c : net.capacities)
    if (!(c > 0)) throw std::invalid_argument("link capacities must be positive");

  std::vector<std::vector<int>> users(static_cast<std::size_t>(links));
  for (int i = 0; i < n; ++i) {
    const auto& route = net.routes[static_cast<std::size_t>(i)];
    if (route.empty()) throw std::invalid_argument("transmitter " + std::to_string(i) + " has an empty route");
    std::set<int> distinct(route.begin(), route.end());
    if (distinct.size() != route.size()) throw std::invalid_argument("route repeats a link");
    for (int l : route) {
      if (l < 0 || l >= links) throw std::invalid_argument("route references an unknown link");
      users[static_cast<std::size_t>(l)].push_back(i);
    }
  }
  for (const auto& u : users)
    if (u.empty()) throw std::invalid_argument("a link carries no transmitter");

  ProblemSpec spec;
  spec.graph = Graph(n);
  for (const auto& u : users)
    for (std::size_t a = 0; a < u.size(); ++a)
      for (std::size_t b = a + 1; b < u.size(); ++b)
        if (!spec.graph.has_edge(u[a], u[b])) spec.graph.add_edge(u[a], u[b]);

  for (int i = 0; i < n; ++i) {
    const auto& route = net.routes[static_cast<std::size_t>(i)];
    const auto& s = utilities[static_cast<std::size_t>(i)];
    const Index dim = 1 + static_cast<Index>(route.size());
    NodeLocal node;
    node.dim = dim;
    node.cost = std::make_shared<SigmoidCost>(dim, s.a, s.b, s.p);
    Vector rate_floor = Vector::Zero(dim);
    rate_floor(0) = -1;
    node.constraints.push_back(std::make_shared<AffineConstraint>(rate_floor, 0.0));
    node.coupling = Matrix::Zero(links, dim);
    for (std::size_t k = 0; k < route.size(); ++k) {
      const Index slot = 1 + static_cast<Index>(k);
      Vector below_slack = Vector::Zero(dim);
      below_slack(0) = 1;
      below_slack(slot) = -1;
      node.constraints.push_back(std::make_shared<AffineConstraint>(below_slack, 0.0));
      node.coupling(route[k], slot) = 1;
    }
    spec.nodes.push_back(std::move(node));
  }
  spec.rhs = Eigen::Map<const Vector>(net.capacities.data(), links);
  spec.family = ProblemFamily::rate_control;
  spec.link_users = users;
  spec.beta = 0.0;
  spec.beta1 = std::sqrt(2.0);
  spec.f_lower = default_lower_bound(spec);
  return spec;
}

RateNetwork chain_rate_network() {
  return {{1.0, 1.5, 2.0, 1.5, 1.0}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}};
}

std::vector<SigmoidParams> random_sigmoid_params(const RateNetwork& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<SigmoidParams> out;
  for (const auto& route : net.routes) {
    double cap = kInf;
    for (int l : route) cap = std::min(cap, net.capacities.at(static_cast<std::size_t>(l)));
    SigmoidParams s;
    s.a = uniform(0.5, 2.0);
    s.b = uniform(0.2, 0.8) * cap;
    s.p = uniform(1.0, 3.0);
    out.push_back(s);
  }
  return out;
}

ProblemSpec example_problems(int which, bool add_edge_14) {
  if (which != 1 && which != 2) throw std::invalid_argument("example must be 1 or 2");
  const double targets[] = {1, 0, 0, 1};
  ProblemSpec spec;
  spec.graph = Graph::line(4);
  if (add_edge_14) spec.graph.add_edge(0, 3);
  for (int i = 0; i < 4; ++i) {
    NodeLocal node;
    node.dim = 1;
    node.cost = QuadraticCost::centered(1.0, targets[i]);
    if (which == 1) {
      node.coupling = scalar_matrix(i == 0 || i == 3 ? 1.0 : 0.0);
    } else {
      node.coupling = scalar_matrix(1.0);
      node.constraints = interval_constraints(1, 0, 0.0, 1.0);
    }
    spec.nodes.push_back(std::move(node));
  }
  spec.rhs = Vector::Ones(1);
  spec.f_lower = 0.0;
  if (which == 2) {
    spec.family = ProblemFamily::dispatch;
    spec.beta = 0.0;
    spec.beta1 = 1.0;
  }
  return spec;
}

ProblemSpec gen_consensus(const Graph& graph, const Vector& targets) {
  const int n = graph.node_count();
  if (targets.size() != n) throw std::invalid_argument("one target per node required");
  Matrix laplacian = Matrix::Zero(n, n);
  for (const auto& [i, j] : graph.edges()) {
    laplacian(i, i) += 1;
    laplacian(j, j) += 1;
    laplacian(i, j) -= 1;
    laplacian(j, i) -= 1;
  }
  ProblemSpec spec;
  spec.graph = graph;
  for (int i = 0; i < n; ++i) {
    NodeLocal node;
    node.dim = 1;
    node.cost = QuadraticCost::centered(1.0, targets(i));
    node.coupling = laplacian.col(i);
    spec.nodes.push_back(std::move(node));
  }
  spec.rhs = Vector::Zero(n);
  spec.f_lower = 0.0;
  return spec;
}

Graph random_connected_graph(int n, double extra_edge_probability, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Graph g(n);
  for (int v = 1; v < n; ++v) g.add_edge(std::uniform_int_distribution<int>(0, v - 1)(rng), v);
  std::bernoulli_distribution extra(extra_edge_probability);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!g.has_edge(u, v) && extra(rng)) g.add_edge(u, v);
  return g;
}

double rho_for_accuracy(double epsilon, double f_at_xprime, double f_lower, double B_at_xprime) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(B_at_xprime > 0)) throw std::invalid_argument("barrier value at x' must be positive");
  if (!(f_at_xprime >= f_lower)) throw std::invalid_argument("f(x') must not be below the lower bound");
  const double gap = f_at_xprime - f_lower;
  if (gap <= epsilon / 2) return epsilon / (2 * B_at_xprime);
  return epsilon * epsilon / (4 * gap * B_at_xprime);
}

std::optional<double> default_lower_bound(const ProblemSpec& spec) {
  double total = 0;
  for (const auto& node : spec.nodes) {
    const std::optional<Interval> box = scalar_box(node);
    const auto* quadratic = dynamic_cast<const QuadraticCost*>(node.cost.get());
    if (box && box->bounded() && quadratic) {
      const double q = quadratic->Q()(0, 0), b = quadratic->b()(0);
      double x = q > 0 ? std::clamp(-b / q, box->lo, box->hi) : (b >= 0 ? box->lo : box->hi);
      total += quadratic->value(Vector::Constant(1, x));
    } else if (auto closed = node.cost->global_lower_bound()) {
      total += *closed;
    } else if (box && box->bounded()) {
      double best = kInf;
      for (int k = 0; k <= 100; ++k)
        best = std::min(best, node.cost->value(Vector::Constant(1, box->lo + (box->hi - box->lo) * k / 100.0)));
      total += best;
    } else {
      return std::nullopt;
    }
  }
  return total;
}

Allocation feasible_initialization(const ProblemSpec& spec) {
  const int n = spec.node_count();

  // Single resource with boxes: proportional fill.
  bool boxed = spec.coupling_rows() == 1 && n > 0;
  std::vector<Interval> boxes;
  for (const auto& node : spec.nodes) {
    const auto box = scalar_box(node);
    if (!boxed || !box || !box->bounded() || node.coupling.size() != 1 || node.coupling(0, 0) != 1.0) {
      boxed = false;
      break;
    }
    boxes.push_back(*box);
  }
  if (boxed) {
    const double c = spec.rhs(0);
    double lo = 0, width = 0;
    for (const auto& b : boxes) {
      lo += b.lo;
      width += b.hi - b.lo;
    }
    if (!(lo < c && c < lo + width))
      throw InfeasibleStartError("no strictly feasible point: demand " + std::to_string(c) +
                                 " is outside the open aggregate box");
    BlockVector x;
    bool comfortable = true;
    for (const auto& b : boxes) {
      const double v = b.lo + (c - lo) * (b.hi - b.lo) / width;
      const double margin = std::min(1e-3, 0.01 * (b.hi - b.lo));
      comfortable = comfortable && v - b.lo >= margin && b.hi - v >= margin;
      x.push_back(Vector::Constant(1, v));
    }
    Allocation start(spec, std::move(x));
    if (comfortable && start.interior_margin() < 0) return start;
  }

  if (spec.family == ProblemFamily::rate_control && !spec.link_users.empty()) {
    BlockVector x;
    for (const auto& node : spec.nodes) {
      Vector block = Vector::Zero(node.dim);
      double smallest = kInf;
      for (Index k = 1; k < node.dim; ++k) {
        Index link = -1;
        node.coupling.col(k).cwiseAbs().maxCoeff(&link);
        block(k) = spec.rhs(link) / static_cast<double>(spec.link_users[static_cast<std::size_t>(link)].size());
        smallest = std::min(smallest, block(k));
      }
      block(0) = 0.1 * smallest;
      x.push_back(std::move(block));
    }
    Allocation start(spec, std::move(x));
    if (start.residual_norm() <= kFeasibilityTolerance && start.interior_margin() < 0) return start;
  }

  return phase_one(spec);
}

}  // namespace dfm
