// Acceptance checks, one line per criterion. Usage: acceptance [criterion ...]; no argument runs all.

#include "dfm/barrier.hpp"
#include "dfm/baselines.hpp"
#include "dfm/benchmarks.hpp"
#include "dfm/centralized.hpp"
#include "dfm/engine.hpp"
#include "dfm/io.hpp"
#include "dfm/reachability.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace dfm;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vector corner() {
  Vector x(4);
  x << 0, 0, 0, 1;
  return x;
}

Vector half_ends() {
  Vector x(4);
  x << 0.5, 0, 0, 0.5;
  return x;
}

double inf_dist(const Allocation& x, const Vector& target) { return (x.stacked() - target).lpNorm<Eigen::Infinity>(); }

/// Always runs every round: the stopping metric is never below a negative tolerance.
constexpr StoppingRule kAllRounds(int rounds) { return {rounds, -1.0}; }

double midpoint_demand(const CaseData& data) {
  double demand = 0;
  for (const auto& g : data.gens) demand += 0.5 * (g.pmin + g.pmax);
  return demand;
}

// ---------------------------------------------------------------------------------------------

Verdict every_iterate_feasible() {
  Verdict v;
  struct Case {
    std::string name;
    ProblemSpec spec;
  };
  std::vector<Case> cases;
  {
    ProblemSpec ex2 = example_problems(2, false);
    ex2.rho = 1e-4;
    cases.push_back({"example2", ex2});
    ProblemSpec ex2e = example_problems(2, true);
    ex2e.rho = 1e-4;
    cases.push_back({"example2+edge", ex2e});
  }
  {
    const CaseData data = synthetic_case(118, 54, 1);
    ProblemSpec spec = gen_economic_dispatch(data, midpoint_demand(data));
    spec.rho = 1e-2;
    cases.push_back({"dispatch54", spec});
  }
  {
    ProblemSpec spec = gen_multi_resource(random_connected_graph(20, 0.15, 1), random_multi_resource_nodes(20, 8, 1));
    spec.rho = 1e-3;
    cases.push_back({"multi-resource20", spec});
  }
  {
    const RateNetwork net = chain_rate_network();
    ProblemSpec spec = gen_rate_control(net, random_sigmoid_params(net, 1));
    spec.rho = 1e-3;
    cases.push_back({"rate-control", spec});
  }

  std::ostringstream summary;
  for (const auto& c : cases) {
    const auto start = std::chrono::steady_clock::now();
    double worst_residual = 0, worst_margin = -std::numeric_limits<double>::infinity();
    int rounds = 0;
    try {
      const RunResult result = run(c.spec, feasible_initialization(c.spec), kAllRounds(2000));
      for (const auto& r : result.trace.records) {
        worst_residual = std::max(worst_residual, r.coupling_residual);
        worst_margin = std::max(worst_margin, r.interior_margin);
      }
      rounds = static_cast<int>(result.trace.records.size()) - 1;
    } catch (const std::exception& e) {
      v.require(false, c.name + " threw: " + e.what());
      continue;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(rounds == 2000, c.name + " ran " + std::to_string(rounds) + " rounds");
    v.require(worst_residual <= 1e-8, c.name + " residual " + num(worst_residual));
    v.require(worst_margin < 0, c.name + " margin " + num(worst_margin));
    v.require(seconds < 60, c.name + " took " + num(seconds) + " s");
    summary << c.name << " res " << num(worst_residual) << " margin " << num(worst_margin) << " " << num(seconds)
            << "s, ";
  }
  if (v.pass) v.detail = summary.str().substr(0, summary.str().size() - 2);
  return v;
}

Verdict counterexamples() {
  Verdict v;
  for (int which : {1, 2}) {
    const ProblemSpec spec = example_problems(which, false);
    {
      // Example 1 has no local sets; Example 2 needs the constrained variant to stay in its boxes.
      const bool constrained = which == 2;
      const EdgeWeights w = default_edge_weights(spec.graph);
      Allocation state = Allocation::from_stacked(spec, corner());
      double worst = 0;
      for (int k = 0; k < 100; ++k) {
        state = pairwise_update(spec, state, w, constrained);
        worst = std::max(worst, inf_dist(state, corner()));
      }
      v.require(worst <= 1e-12, "naive on example " + std::to_string(which) + " moved " + num(worst));
    }
  }

  const ProblemSpec ex1 = example_problems(1, true);
  const RunResult dfm1 = run(ex1, Allocation::from_stacked(ex1, corner()), {500, 0.0});
  const double d1 = inf_dist(dfm1.final_state, half_ends());
  v.require(d1 <= 1e-6, "example 1+edge distance " + num(d1));

  ProblemSpec ex2 = example_problems(2, true);
  ex2.rho = 1e-4;
  const RunResult dfm2 = run(ex2, feasible_initialization(ex2), {20000, 1e-14});
  const double d2 = inf_dist(dfm2.final_state, half_ends());
  v.require(d2 <= 1e-2, "example 2+edge at rho 1e-4 ends " + num(d2) + " from (1/2,0,0,1/2) after " +
                            std::to_string(dfm2.trace.records.size() - 1) + " rounds");
  if (v.pass) v.detail = "naive fixed, example 1 dist " + num(d1) + ", example 2 dist " + num(d2);
  return v;
}

Verdict one_round() {
  Verdict v;
  const ProblemSpec spec = example_problems(1, true);
  const Allocation x0 = Allocation::from_stacked(spec, corner());
  const RoundResult r = dfm_round(spec, x0, step_sizes(spec.graph));
  Vector expected(4);
  expected << 1.0 / 3, 0, 0, 2.0 / 3;
  const double dist = inf_dist(r.next, expected);
  const double F0 = evaluate_objective(spec, x0).F, F1 = evaluate_objective(spec, r.next).F;
  v.require(dist <= 1e-9, "distance to (1/3,0,0,2/3) " + num(dist));
  v.require(std::abs(F0 - 0.5) <= 1e-12, "F(x0) " + num(F0));
  v.require(std::abs(F1 - 5.0 / 18) <= 1e-9, "F(x1) " + num(F1));
  if (v.pass) v.detail = "distance " + num(dist) + ", F 0.5 -> " + num(F1);
  return v;
}

/// Strongly convex dispatch instance shared by criteria 4 and 5.
struct DispatchRun {
  ProblemSpec spec;
  RunResult result;
  BoundInputs inputs;
};

DispatchRun dispatch_run(bool with_reference) {
  const CaseData data = synthetic_case(118, 54, 2);
  ProblemSpec spec = gen_economic_dispatch(data, midpoint_demand(data));
  spec.rho = 1.0;
  const Allocation x0 = feasible_initialization(spec);
  RunResult result = run(spec, x0, {600, -1.0});
  BoundInputs inputs = bound_inputs_from(spec, result);
  double sigma = std::numeric_limits<double>::infinity();
  for (const auto& node : spec.nodes) sigma = std::min(sigma, node.cost->strong_convexity());
  inputs.sigma = sigma;
  if (with_reference) {
    CentralizedOptions opts;
    opts.tolerance = 1e-12;
    inputs.F_star = solve_barrier_problem(spec, result.final_state, opts).value.F;
  }
  return {std::move(spec), std::move(result), inputs};
}

Verdict descent_bounds() {
  Verdict v;
  const DispatchRun d = dispatch_run(false);
  const BoundReport report = check_bounds(d.spec, d.result.trace, d.inputs);
  for (const char* name : {"descent_inequality", "telescoped_gradient_bound"}) {
    const BoundCheck* c = report.find(name);
    v.require(c != nullptr && c->applicable, std::string(name) + " not applicable");
    if (c && c->applicable) v.require(c->holds, std::string(name) + " violated, slack " + num(c->worst_slack));
  }
  if (v.pass)
    v.detail = "600 rounds, L " + num(report.L) + ", L_B " + num(report.L_B) + ", worst slack " +
               num(report.find("descent_inequality")->worst_slack) + " / " +
               num(report.find("telescoped_gradient_bound")->worst_slack);
  return v;
}

Verdict linear_rate() {
  Verdict v;
  const DispatchRun d = dispatch_run(true);
  const BoundReport report = check_bounds(d.spec, d.result.trace, d.inputs);
  const BoundCheck* c = report.find("linear_rate");
  v.require(c != nullptr && c->applicable, "linear_rate not applicable");
  if (c && c->applicable) v.require(c->holds, "rate violated, slack " + num(c->worst_slack) + " " + c->detail);
  if (v.pass) v.detail = "sigma " + num(*d.inputs.sigma) + ", lambda_W " + num(*d.inputs.lambda_W) + ", worst slack " + num(c->worst_slack);
  return v;
}

Verdict accuracy_budget() {
  Verdict v;
  // Five generators on a line of buses; demand high enough that two upper bounds bind at the optimum.
  CaseData data;
  const double c2[] = {0.5, 1.0, 0.8, 1.2, 0.7}, c1[] = {1.0, 2.0, 0.5, 1.5, 3.0}, hi[] = {2.0, 1.5, 1.0, 3.0, 2.5};
  for (int i = 0; i < 5; ++i) {
    data.buses.push_back({i + 1, i == 0 ? 3 : 2});
    data.gens.push_back({i + 1, 0.0, hi[i]});
    data.gencosts.push_back({2, c2[i], c1[i], 0.0});
    if (i > 0) data.branches.push_back({i, i + 1});
  }
  const double demand = 7.0;
  ProblemSpec spec = gen_economic_dispatch(data, demand);

  std::vector<oracle::ScalarNode> nodes;
  for (int i = 0; i < 5; ++i) nodes.push_back({c2[i], c1[i], 0.0, 0.0, hi[i]});
  const auto star = oracle::water_filling(nodes, demand);
  double f_star = 0;
  for (int i = 0; i < 5; ++i) f_star += nodes[static_cast<std::size_t>(i)].cost(star[static_cast<std::size_t>(i)]);

  const Allocation xprime = feasible_initialization(spec);
  double f_prime = 0, B_prime = 0;
  for (int i = 0; i < 5; ++i) {
    f_prime += spec.nodes[static_cast<std::size_t>(i)].cost->value(xprime.block(i));
    B_prime += barrier_value(spec.nodes[static_cast<std::size_t>(i)], xprime.block(i));
  }
  const double epsilon = 0.05;
  spec.rho = rho_for_accuracy(epsilon, f_prime, *spec.f_lower, B_prime);
  const RunResult result = run(spec, xprime, {100000, 1e-14});
  const double f_end = evaluate_objective(spec, result.final_state).f;
  const double gap = f_end - f_star;
  v.require(gap <= epsilon, "f - f* = " + num(gap));
  v.require(result.final_state.residual_norm() <= 1e-8, "final residual " + num(result.final_state.residual_norm()));
  v.detail += (v.detail.empty() ? "" : "; ") + std::string("rho ") + num(spec.rho) + ", f - f* = " + num(gap) +
              " after " + std::to_string(result.trace.records.size() - 1) + " rounds";
  return v;
}

ProblemSpec random_full_rank_instance(int n, Index dim, Index rows, std::uint64_t seed, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ProblemSpec spec;
  spec.graph = random_connected_graph(n, 0.2, seed);
  for (int i = 0; i < n; ++i) {
    NodeLocal node;
    node.dim = dim;
    node.cost = std::make_shared<QuadraticCost>(Matrix::Identity(dim, dim), Vector::Zero(dim), 0.0);
    node.coupling = Matrix::NullaryExpr(rows, dim, [&] { return normal(rng); });
    spec.nodes.push_back(node);
  }
  spec.rhs = Vector::Zero(rows);
  return spec;
}

Verdict reachability_suite() {
  Verdict v;
  v.require(!check_reachability(example_problems(1, false)).holds, "example 1 reported reachable");
  v.require(check_reachability(example_problems(1, true)).holds, "example 1+edge reported unreachable");

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  int shortcut_pass = 0, decomposed = 0;
  double worst_reconstruction = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + t % 6;
    const Index rows = 1 + t % 3;
    const Index dim = rows + t % 2;
    const ProblemSpec spec = random_full_rank_instance(n, dim, rows, 5000 + static_cast<std::uint64_t>(t), rng);
    if (check_lemma1_shortcut(spec).applies && check_reachability(spec).holds) ++shortcut_pass;

    const Matrix Z = null_space_basis(spec.coupling_matrix());
    const Vector p = Z * Vector::NullaryExpr(Z.cols(), [&] { return normal(rng); });
    std::vector<Matrix> blocks;
    for (const auto& node : spec.nodes) blocks.push_back(node.coupling);
    const auto pieces = oracle::constructive_decomposition(blocks, spec.graph, p);
    Vector total = Vector::Zero(p.size());
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      const Vector& q = pieces[static_cast<std::size_t>(i)];
      const Matrix P = local_subspace_basis(spec, i).projector();
      inside = inside && (P * q - q).norm() <= 1e-8 * (1 + q.norm());
      total += q;
    }
    const double err = (total - p).norm();
    worst_reconstruction = std::max(worst_reconstruction, err);
    if (inside && err <= 1e-8) ++decomposed;
  }
  v.require(shortcut_pass == 100, std::to_string(shortcut_pass) + "/100 random instances reachable");
  v.require(decomposed == 100, std::to_string(decomposed) + "/100 decompositions");

  const Vector targets = Vector::LinSpaced(5, 0, 4);
  v.require(!check_reachability(gen_consensus(Graph::line(5), targets)).holds, "consensus path reported reachable");
  v.require(check_reachability(gen_consensus(Graph::star(5), targets)).holds, "consensus star reported unreachable");
  if (v.pass) v.detail = "worst reconstruction error " + num(worst_reconstruction);
  return v;
}

Verdict numerical_calculus() {
  Verdict v;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Node on R^2: unit disc, a half-plane and a box coordinate.
  NodeLocal node;
  node.dim = 2;
  node.coupling = Matrix::Ones(1, 2);
  node.cost = std::make_shared<QuadraticCost>(Matrix::Identity(2, 2), Vector::Zero(2), 0.0);
  node.constraints.push_back(std::make_shared<QuadraticConstraint>(2.0 * Matrix::Identity(2, 2), Vector::Zero(2), -1.0));
  Vector a(2);
  a << 1.0, 2.0;
  node.constraints.push_back(std::make_shared<AffineConstraint>(a, 1.5));
  for (const auto& c : interval_constraints(2, 1, -0.9, 0.95)) node.constraints.push_back(c);

  double worst_grad = 0, worst_hess = 0;
  int points = 0;
  while (points < 1000) {
    Vector x(2);
    x << unit(rng), unit(rng);
    if (!(node.margin(x) < -1e-3)) continue;
    ++points;
    const BarrierEval e = barrier_eval(node, x);
    const double h = 1e-4 * std::min(1.0, -node.margin(x));
    const Vector fd_grad = oracle::numeric_gradient([&](const Vector& z) { return barrier_value(node, z); }, x, h);
    const Matrix fd_hess = oracle::numeric_jacobian([&](const Vector& z) { return barrier_gradient(node, z); }, x, h);
    worst_grad = std::max(worst_grad, (fd_grad - e.gradient).norm() / std::max(1.0, e.gradient.norm()));
    worst_hess = std::max(worst_hess, (fd_hess - e.hessian).norm() / std::max(1.0, e.hessian.norm()));
  }
  v.require(worst_grad <= 1e-5, "gradient relative error " + num(worst_grad));
  v.require(worst_hess <= 1e-4, "Hessian relative error " + num(worst_hess));

  // Smoothness inequality on sublevel sets {B^j <= M}: per constraint, beta and beta1 over the unit disc.
  struct Term {
    std::size_t index;
    double beta, beta1;
  };
  const Term terms[] = {{0, 2.0, 2.0}, {1, 0.0, a.norm()}, {2, 0.0, 1.0}, {3, 0.0, 1.0}};
  int pairs = 0, violations = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (double M : {5.0, 50.0, 500.0}) {
    for (const Term& t : terms) {
      const Constraint& g = *node.constraints[t.index];
      auto in_level = [&](const Vector& z) { return node.margin(z) < 0 && -g.value(z) >= 1.0 / M; };
      int made = 0;
      while (made < 300) {
        Vector x(2), y(2);
        x << unit(rng), unit(rng);
        y << unit(rng), unit(rng);
        if (made % 3 == 0) y = x + 1e-3 * y;
        if (!in_level(x) || !in_level(y)) continue;
        ++made;
        ++pairs;
        const SmoothnessResidual r = local_smoothness_residual(g, x, y, M, t.beta, t.beta1);
        worst_gap = std::max(worst_gap, r.rhs - r.lhs);
        if (r.lhs < r.rhs - 1e-12 * (1 + std::abs(r.lhs))) ++violations;
      }
    }
  }
  v.require(violations == 0, std::to_string(violations) + "/" + std::to_string(pairs) + " pairs violate the smoothness inequality");
  if (v.pass)
    v.detail = "1000 points, gradient " + num(worst_grad) + ", Hessian " + num(worst_hess) + "; " +
               std::to_string(pairs) + " pairs";
  return v;
}

Verdict weighted_gradient_equivalence() {
  Verdict v;
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> curvature(0.2, 1.0), shift(-3.0, 3.0);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 9;
    const double L = 1.5;
    ProblemSpec spec;
    spec.graph = random_connected_graph(n, 0.3, 700 + static_cast<std::uint64_t>(t));
    Vector x(n), grad(n);
    for (int i = 0; i < n; ++i) {
      const double q = curvature(rng), b = shift(rng);
      x(i) = shift(rng);
      grad(i) = q * x(i) + b;
      NodeLocal node;
      node.dim = 1;
      node.cost = std::make_shared<QuadraticCost>(Matrix::Constant(1, 1, q), Vector::Constant(1, b), 0.0, L);
      node.coupling = Matrix::Ones(1, 1);
      spec.nodes.push_back(node);
    }
    spec.rhs = Vector::Constant(1, x.sum());
    const StepSizes eta = step_sizes(spec.graph);
    const Vector expected = x - oracle::weighted_gradient_matrix(spec.graph, eta.eta) * grad / L;
    const Vector got = dfm_round(spec, Allocation::from_stacked(spec, x), eta).next.stacked();
    worst = std::max(worst, (got - expected).lpNorm<Eigen::Infinity>());
  }
  v.require(worst <= 1e-10, "max deviation " + num(worst));
  if (v.pass) v.detail = "20 instances, max deviation " + num(worst);
  return v;
}

Verdict determinism() {
  Verdict v;
  std::vector<std::pair<std::string, ProblemSpec>> cases;
  {
    const CaseData data = synthetic_case(118, 54, 7);
    ProblemSpec spec = gen_economic_dispatch(data, midpoint_demand(data));
    spec.rho = 0.1;
    cases.emplace_back("dispatch", spec);
  }
  {
    ProblemSpec spec = gen_multi_resource(random_connected_graph(20, 0.15, 7), random_multi_resource_nodes(20, 8, 7));
    spec.rho = 1e-2;
    cases.emplace_back("multi-resource", spec);
  }
  {
    const RateNetwork net = chain_rate_network();
    ProblemSpec spec = gen_rate_control(net, random_sigmoid_params(net, 7));
    spec.rho = 1e-2;
    cases.emplace_back("rate-control", spec);
  }
  for (const auto& [name, spec] : cases) {
    const Allocation x0 = feasible_initialization(spec);
    std::vector<std::string> traces;
    for (int threads : {1, 2, 8}) {
      EngineOptions opts;
      opts.threads = threads;
      traces.push_back(write_trace_csv(run(spec, x0, {200, -1.0}, opts).trace));
    }
    v.require(traces[0] == traces[1] && traces[0] == traces[2], name + " traces differ across thread counts");
  }
  if (v.pass) v.detail = "dispatch, multi-resource and rate-control traces identical for 1, 2 and 8 threads";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Verdict()>>> criteria{
      {1, {"every iterate feasible", every_iterate_feasible}},
      {2, {"counterexample reproduction", counterexamples}},
      {3, {"one-round hand oracle", one_round}},
      {4, {"descent inequality and telescoped bound", descent_bounds}},
      {5, {"linear rate", linear_rate}},
      {6, {"accuracy budget", accuracy_budget}},
      {7, {"reachability suite", reachability_suite}},
      {8, {"numerical calculus", numerical_calculus}},
      {9, {"weighted-gradient equivalence", weighted_gradient_equivalence}},
      {10, {"determinism across thread counts", determinism}},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::stoi(argv[k]));
  if (selected.empty())
    for (const auto& [id, entry] : criteria) selected.push_back(id);

  int failures = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("criterion %d: unknown\n", id);
      ++failures;
      continue;
    }
    Verdict verdict;
    try {
      verdict = it->second.second();
    } catch (const std::exception& e) {
      verdict = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d (%s): %s: %s\n", id, it->second.first, verdict.pass ? "PASS" : "FAIL",
                verdict.detail.c_str());
    std::fflush(stdout);
    failures += verdict.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
