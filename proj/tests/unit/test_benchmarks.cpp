#include "dfm/barrier.hpp"
#include "dfm/benchmarks.hpp"
#include "dfm/errors.hpp"
#include "dfm/reachability.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace dfm;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

// Three buses on a path, generators on buses 1 and 3.
constexpr const char* kTinyCase = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
%% bus data
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.06	0.94;
	2	1	50	0	0	0	1	1	0	135	1	1.06	0.94;
	3	2	0	0	0	0	1	1	0	135	1	1.06	0.94;  % trailing comment
];
mpc.gen = [
	1	0	0	10	-10	1	100	1	100	0	0	0	0	0	0	0	0	0	0	0	0;
	3	0	0	10	-10	1	100	1	80	10	0	0	0	0	0	0	0	0	0	0	0;
];
mpc.branch = [
	1	2	0.01	0.1	0	0	0	0	0	0	1	-360	360;
	2	3	0.01	0.1	0	0	0	0	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	3	0.01	40	0;
	2	0	0	3	0.02	20	5;
];
)";

std::string replace_block(std::string text, const std::string& block, const std::string& body) {
  const auto start = text.find("mpc." + block + " = [");
  const auto end = text.find("];", start);
  return text.replace(start, end + 2 - start, "mpc." + block + " = [\n" + body + "];");
}

CaseData two_unit_boxes() {
  CaseData data;
  data.buses = {{1, 3}, {2, 1}};
  data.gens = {{1, 0, 1}, {2, 0, 1}};
  data.gencosts = {{2, 1, 0, 0}, {2, 1, 0, 0}};
  data.branches = {{1, 2}};
  return data;
}

}  // namespace

TEST_CASE("MATPOWER parsing") {
  const CaseData data = parse_matpower_case(kTinyCase);
  REQUIRE(data.buses.size() == 3);
  REQUIRE(data.gens.size() == 2);
  CHECK(data.gens[0].bus == 1);
  CHECK(data.gens[0].pmax == 100);
  CHECK(data.gens[0].pmin == 0);
  CHECK(data.gens[1].pmax == 80);
  CHECK(data.gens[1].pmin == 10);
  CHECK(data.gencosts[0] == GenCostRecord{2, 0.01, 40, 0});
  CHECK(data.gencosts[1] == GenCostRecord{2, 0.02, 20, 5});
  CHECK(data.branches == std::vector<BranchRecord>{{1, 2}, {2, 3}});
  CHECK(data.warnings.empty());

  const ProblemSpec spec = gen_economic_dispatch(data, 100.0);
  CHECK(spec.node_count() == 2);
  CHECK(spec.coupling_rows() == 1);
  const auto& first = spec.nodes[0];
  CHECK(first.cost->value(v1(10.0)) == doctest::Approx(0.01 * 100 + 400));
  CHECK(first.margin(Vector::Constant(1, 50.0)) < 0);
  CHECK(first.margin(Vector::Constant(1, 100.0)) == doctest::Approx(0.0).scale(1));
  CHECK(spec.nodes[1].margin(Vector::Constant(1, 5.0)) > 0);
  CHECK(validate_problem(spec).ok());
}

TEST_CASE("MATPOWER parse errors and warnings") {
  const std::string text = kTinyCase;
  CHECK_THROWS_WITH_AS(parse_matpower_case(replace_block(text, "gencost", "")), doctest::Contains("no cost data"),
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_matpower_case(text.substr(0, text.find("mpc.gencost") + 20)), doctest::Contains("line"),
                       ParseError);
  try {
    parse_matpower_case(replace_block(text, "bus", "1 3 0;\n2 1 x;\n3 2 0;\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() > 0);
  }
  CHECK_THROWS_AS(parse_matpower_case(replace_block(text, "gen", "7 0 0 10 -10 1 100 1 80 10;\n")), ParseError);

  const CaseData piecewise =
      parse_matpower_case(replace_block(text, "gencost", "2 0 0 3 0.01 40 0;\n1 0 0 2 0 0 100 4000;\n"));
  CHECK(piecewise.gens.size() == 1);
  CHECK(piecewise.gencosts.size() == 1);
  CHECK(piecewise.warnings.size() == 1);

  CHECK_THROWS_AS(load_matpower_case("/nonexistent/case.m"), FileNotFoundError);
}

TEST_CASE("MATPOWER round trip") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const CaseData original = synthetic_case(50, 14, seed);
    const CaseData back = parse_matpower_case(write_matpower_case(original, "roundtrip"));
    CHECK(back.buses == original.buses);
    CHECK(back.gens == original.gens);
    CHECK(back.gencosts == original.gencosts);
    CHECK(back.branches == original.branches);
  }
  const CaseData tiny = parse_matpower_case(kTinyCase);
  const CaseData again = parse_matpower_case(write_matpower_case(tiny));
  CHECK(again.gens == tiny.gens);
  CHECK(again.gencosts == tiny.gencosts);
}

TEST_CASE("generator graph derivation") {
  const Graph tiny = derive_generator_graph(parse_matpower_case(kTinyCase));
  CHECK(tiny.node_count() == 2);
  CHECK(tiny.has_edge(0, 1));

  CaseData chain;
  chain.buses = {{1, 2}, {2, 2}, {3, 2}};
  chain.gens = {{1, 0, 1}, {2, 0, 1}, {3, 0, 1}};
  chain.gencosts.assign(3, {2, 1, 0, 0});
  chain.branches = {{1, 2}, {2, 3}};
  const Graph g = derive_generator_graph(chain);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 2));
  CHECK_FALSE(g.has_edge(0, 2));

  CaseData split = chain;
  split.branches = {{1, 2}};
  CHECK_THROWS_AS(derive_generator_graph(split), std::invalid_argument);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CaseData data = synthetic_case(70, 25, seed);
    std::vector<std::pair<int, int>> branches;
    for (const auto& br : data.branches) branches.emplace_back(br.from - 1, br.to - 1);
    std::vector<int> gen_bus;
    for (const auto& gen : data.gens) gen_bus.push_back(gen.bus - 1);
    std::vector<std::pair<int, int>> expected = oracle::generator_edges(70, branches, gen_bus);
    CHECK(derive_generator_graph(data).edges() == expected);
  }
}

TEST_CASE("economic dispatch construction") {
  const ProblemSpec two = gen_economic_dispatch(two_unit_boxes(), 1.0);
  CHECK(two.coupling_rows() == 1);
  CHECK(two.family == ProblemFamily::dispatch);
  CHECK(validate_problem(two).ok());
  CHECK_THROWS_AS(gen_economic_dispatch(two_unit_boxes(), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_economic_dispatch(two_unit_boxes(), 0.0), std::invalid_argument);

  const CaseData big = synthetic_case(118, 54, 1);
  double demand = 0;
  for (const auto& gen : big.gens) demand += 0.5 * (gen.pmin + gen.pmax);
  const ProblemSpec dispatch = gen_economic_dispatch(big, demand);
  CHECK(dispatch.node_count() == 54);
  CHECK(validate_problem(dispatch).ok());
  CHECK(check_lemma1_shortcut(dispatch).applies);
  const auto lower = default_lower_bound(dispatch);
  REQUIRE(lower.has_value());
  CHECK(*dispatch.f_lower == doctest::Approx(*lower));
  CHECK(*lower <= evaluate_objective(dispatch, feasible_initialization(dispatch)).f);
}

TEST_CASE("multi-resource construction") {
  std::vector<MultiResourceNode> nodes{{1, 1, 2, ResourceRole::renewable, 3},
                                       {1, 1, 1, ResourceRole::coal, 3},
                                       {1, 1, 2, ResourceRole::consumer, 0},
                                       {1, 1, 1, ResourceRole::consumer, 0}};
  const ProblemSpec spec = gen_multi_resource(Graph::line(4), nodes);
  CHECK(spec.coupling_rows() == 2);
  CHECK(spec.nodes[0].dim == 2);
  CHECK((spec.nodes[0].coupling - Matrix::Identity(2, 2)).norm() == 0.0);
  Vector x(2);
  x << 2, 0;
  CHECK(spec.nodes[2].cost->value(x) == doctest::Approx(0.0).scale(1));
  x << -0.1, 0;
  CHECK(spec.nodes[2].margin(x) > 0);
  x << -0.1, 0.5;
  CHECK(spec.nodes[0].margin(x) < 0);
  CHECK(check_reachability(spec).holds);
  CHECK(validate_problem(spec).ok());
  const Allocation start = feasible_initialization(spec);
  CHECK(start.residual_norm() <= 1e-9);
  CHECK(start.interior_margin() < 0);

  nodes[1].role = ResourceRole::renewable;
  CHECK_THROWS_AS(gen_multi_resource(Graph::line(4), nodes), std::invalid_argument);

  const auto drawn = random_multi_resource_nodes(20, 8, 5);
  CHECK(drawn.size() == 20);
  CHECK(drawn == random_multi_resource_nodes(20, 8, 5));
  const ProblemSpec random = gen_multi_resource(random_connected_graph(20, 0.15, 5), drawn);
  CHECK(feasible_initialization(random).interior_margin() < 0);
}

TEST_CASE("rate-control construction") {
  const RateNetwork one_link{{1.0}, {{0}, {0}}};
  const ProblemSpec spec = gen_rate_control(one_link, {{1, 0, 2}, {1, 0, 2}});
  CHECK(spec.coupling_rows() == 1);
  CHECK(spec.rhs(0) == 1.0);
  CHECK(spec.graph.has_edge(0, 1));
  for (const auto& node : spec.nodes) {
    CHECK(node.dim == 2);
    CHECK(node.constraint_count() == 2);
    Matrix expected(1, 2);
    expected << 0, 1;
    CHECK(node.coupling == expected);
    Vector x(2);
    x << 0.5, 0.4;
    CHECK(node.margin(x) > 0);
    x << 0.3, 0.4;
    CHECK(node.margin(x) < 0);
  }
  const auto* sigmoid = dynamic_cast<const SigmoidCost*>(spec.nodes[0].cost.get());
  REQUIRE(sigmoid != nullptr);
  CHECK(sigmoid->q() == doctest::Approx(-1.0));
  CHECK(spec.link_users == std::vector<std::vector<int>>{{0, 1}});

  const RateNetwork chain = chain_rate_network();
  const ProblemSpec path = gen_rate_control(chain, random_sigmoid_params(chain, 9));
  CHECK(path.graph.edges() == Graph::line(4).edges());
  CHECK(check_reachability(path).holds);
  const Allocation start = feasible_initialization(path);
  CHECK(start.residual_norm() <= 1e-12);
  CHECK(start.interior_margin() < 0);

  CHECK_THROWS_AS(gen_rate_control({{1.0}, {{0}, {}}}, {{}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(gen_rate_control({{0.0}, {{0}}}, {{}}), std::invalid_argument);
}

TEST_CASE("counterexamples") {
  const ProblemSpec ex1 = example_problems(1, false);
  Vector opt(4);
  opt << 0.5, 0, 0, 0.5;
  CHECK(evaluate_objective(ex1, Allocation::from_stacked(ex1, opt)).F == doctest::Approx(0.25));
  CHECK_FALSE(ex1.has_barriers());
  const ProblemSpec ex2 = example_problems(2, true);
  CHECK(ex2.graph.has_edge(0, 3));
  CHECK(ex2.max_constraint_count() == 2);
  CHECK_THROWS_AS(example_problems(3, false), std::invalid_argument);
}

TEST_CASE("rho for a target accuracy") {
  CHECK(rho_for_accuracy(0.1, 1.0, 0.0, 10.0) == doctest::Approx(2.5e-4));
  CHECK(rho_for_accuracy(0.1, 0.04, 0.0, 10.0) == doctest::Approx(5e-3));
  CHECK(rho_for_accuracy(0.1, 0.05, 0.0, 10.0) == doctest::Approx(5e-3));
  CHECK_THROWS_AS(rho_for_accuracy(0.0, 1.0, 0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(rho_for_accuracy(0.1, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rho_for_accuracy(0.1, -1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("feasible initialization") {
  const ProblemSpec two = gen_economic_dispatch(two_unit_boxes(), 1.0);
  const Vector x = feasible_initialization(two).stacked();
  CHECK(x(0) == doctest::Approx(0.5));
  CHECK(x(1) == doctest::Approx(0.5));

  const Vector quarters = feasible_initialization(example_problems(2, false)).stacked();
  CHECK((quarters - Vector::Constant(4, 0.25)).norm() < 1e-15);

  ProblemSpec impossible = two;
  impossible.rhs = v1(3.0);
  CHECK_THROWS_AS(feasible_initialization(impossible), InfeasibleStartError);

  // A crowded corner falls back to the phase-1 solve and still lands strictly inside.
  ProblemSpec tight = two;
  tight.rhs = v1(1.9999);
  const Allocation near_top = feasible_initialization(tight);
  CHECK(near_top.interior_margin() < 0);
  CHECK(near_top.residual_norm() <= 1e-9);
}
