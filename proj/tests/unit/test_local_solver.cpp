#include "dfm/benchmarks.hpp"
#include "dfm/errors.hpp"
#include "dfm/linalg.hpp"
#include "dfm/local_solver.hpp"
#include "dfm/newton.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <random>

using namespace dfm;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

ProblemSpec two_node_pair() {
  ProblemSpec spec;
  spec.graph = Graph::complete(2);
  for (double target : {1.0, 0.0}) {
    NodeLocal node;
    node.dim = 1;
    node.cost = QuadraticCost::centered(1.0, target);
    node.coupling = Matrix::Ones(1, 1);
    spec.nodes.push_back(node);
  }
  spec.rhs = Vector::Zero(1);
  return spec;
}

}  // namespace

TEST_CASE("subspace helpers") {
  Matrix A(2, 3);
  A << 1, 2, 3, 2, 4, 6;
  CHECK(numerical_rank(A) == 1);
  const Matrix Z = null_space_basis(A);
  CHECK(Z.cols() == 2);
  CHECK((A * Z).norm() < 1e-12);
  CHECK((Z.transpose() * Z - Matrix::Identity(2, 2)).norm() < 1e-12);
  const Matrix R = row_space_rows(A);
  CHECK(R.rows() == 1);
  CHECK((A * pseudo_inverse(A) * A - A).norm() < 1e-12);
  CHECK(null_space_basis(Matrix(0, 3)).cols() == 3);
  CHECK(numerical_rank(Matrix::Zero(2, 2)) == 0);
}

TEST_CASE("Newton KKT step") {
  Matrix H = Matrix::Identity(2, 2);
  Vector g(2);
  g << -1, 0;
  const Matrix E = Matrix::Ones(1, 2);
  const KktStep step = newton_kkt_step(H, g, E);
  CHECK(step.direction(0) == doctest::Approx(0.5));
  CHECK(step.direction(1) == doctest::Approx(-0.5));
  CHECK(step.decrement == doctest::Approx(std::sqrt(0.5)));

  const KktStep still = newton_kkt_step(H, Vector::Constant(2, 0.7), E);
  CHECK(still.direction.norm() < 1e-14);
  CHECK(still.decrement < 1e-14);

  // Dependent coupling rows make the KKT matrix singular.
  Matrix dependent(2, 3);
  dependent << 1, 1, 0, 2, 2, 0;
  Vector g3(3);
  g3 << 1, -2, 0.5;
  CHECK_THROWS_AS(newton_kkt_step(Matrix::Identity(3, 3), g3, dependent), RankDeficientCoupling);
  const KktStep reg = newton_kkt_step(Matrix::Identity(3, 3), g3, dependent, 1e-10);
  CHECK(reg.regularized);
  CHECK((dependent * reg.direction).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("fraction to boundary") {
  const ConstraintList box = interval_constraints(1, 0, 0.0, 1.0);
  const StepCap full = fraction_to_boundary(v1(0.5), v1(1.0), box);
  CHECK(full.alpha_max == doctest::Approx(0.5));
  CHECK(full.usable == doctest::Approx(0.495));
  CHECK(fraction_to_boundary(v1(0.5), v1(0.1), box).alpha_max == 1.0);
  CHECK(fraction_to_boundary(v1(0.9), v1(1.0), box).alpha_max == doctest::Approx(0.1));
  CHECK(fraction_to_boundary(v1(0.9), v1(0.0), box).alpha_max == 1.0);

  // Non-affine constraint: the unit disc, bisection.
  ConstraintList disc{std::make_shared<QuadraticConstraint>(2.0 * Matrix::Identity(2, 2), Vector::Zero(2), -1.0)};
  Vector x = Vector::Zero(2), d(2);
  d << 2.0, 0.0;
  CHECK(boundary_distance(x, d, disc) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("subproblem closed forms") {
  const ProblemSpec pair = two_node_pair();
  const Allocation zero(pair, {v1(0), v1(0)});
  const ReallocationPlan plan = solve_subproblem(pair, 0, zero);
  CHECK(plan.members == std::vector<int>{0, 1});
  CHECK(plan.delta_for(0)(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(plan.delta_for(1)(0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(plan.iterations <= 2);
  CHECK(plan.objective <= plan.objective_at_zero);

  // Isolated node with an invertible square block cannot move.
  ProblemSpec lone;
  lone.graph = Graph(1);
  NodeLocal node;
  node.dim = 2;
  node.cost = std::make_shared<QuadraticCost>(Matrix::Identity(2, 2), Vector::Ones(2), 0.0);
  Matrix A(2, 2);
  A << 2, 1, 1, 3;
  node.coupling = A;
  lone.nodes.push_back(node);
  lone.rhs = Vector::Zero(2);
  const ReallocationPlan stuck = solve_subproblem(lone, 0, Allocation(lone, {Vector::Zero(2)}));
  CHECK(stuck.delta_for(0).norm() < 1e-12);

  // Example 1, second node at (0,0,0,1): already optimal.
  const ProblemSpec ex1 = example_problems(1, false);
  const Allocation corner(ex1, {v1(0), v1(0), v1(0), v1(1)});
  const ReallocationPlan middle = solve_subproblem(ex1, 1, corner);
  for (int j : middle.members) CHECK(middle.delta_for(j).norm() < 1e-12);
  CHECK_THROWS_AS(middle.delta_for(3), std::out_of_range);
}

TEST_CASE("barrier-free subproblems match a direct linear solve") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    ProblemSpec spec;
    spec.graph = random_connected_graph(5, 0.3, 100 + static_cast<std::uint64_t>(trial));
    const Index m = 2;
    for (int i = 0; i < 5; ++i) {
      NodeLocal node;
      node.dim = 3;
      Matrix B = Matrix::NullaryExpr(3, 3, [&] { return normal(rng); });
      Matrix Q = B * B.transpose() + 0.1 * Matrix::Identity(3, 3);
      node.cost = std::make_shared<QuadraticCost>(Q, Vector::NullaryExpr(3, [&] { return normal(rng); }), 0.0);
      node.coupling = Matrix::NullaryExpr(m, 3, [&] { return normal(rng); });
      spec.nodes.push_back(node);
    }
    BlockVector x;
    for (int i = 0; i < 5; ++i) x.push_back(Vector::NullaryExpr(3, [&] { return normal(rng); }));
    Vector c = Vector::Zero(m);
    for (int i = 0; i < 5; ++i) c += spec.nodes[static_cast<std::size_t>(i)].coupling * x[static_cast<std::size_t>(i)];
    spec.rhs = c;
    const Allocation state(spec, x);

    for (int owner = 0; owner < 5; ++owner) {
      const ReallocationPlan plan = solve_subproblem(spec, owner, state);
      // Oracle: [L I, E^T; E, 0] [p; -v] = [-g; 0] over the neighborhood.
      const auto& members = plan.members;
      const Index n = 3 * static_cast<Index>(members.size());
      Matrix K = Matrix::Zero(n + m, n + m);
      Vector rhs = Vector::Zero(n + m);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto& nd = spec.nodes[static_cast<std::size_t>(members[k])];
        const Index at = 3 * static_cast<Index>(k);
        K.block(at, at, 3, 3) = nd.cost->smoothness() * Matrix::Identity(3, 3);
        K.block(at, n, 3, m) = nd.coupling.transpose();
        K.block(n, at, m, 3) = nd.coupling;
        rhs.segment(at, 3) = -nd.cost->gradient(x[static_cast<std::size_t>(members[k])]);
      }
      const Vector sol = K.fullPivLu().solve(rhs);
      for (std::size_t k = 0; k < members.size(); ++k)
        CHECK((plan.deltas[k] - sol.segment(3 * static_cast<Index>(k), 3)).norm() <= 1e-10 * (1 + sol.norm()));
      CHECK(plan.equality_residual <= 1e-10);
    }
  }
}

TEST_CASE("subproblem invariants with barriers") {
  ProblemSpec spec = gen_economic_dispatch(synthetic_case(40, 15, 9), 2000.0);
  spec.rho = 1.0;
  const Allocation start = feasible_initialization(spec);
  for (int owner = 0; owner < spec.node_count(); ++owner) {
    const ReallocationPlan plan = solve_subproblem(spec, owner, start);
    CHECK(plan.converged);
    CHECK(plan.equality_residual <= 1e-9);
    CHECK(plan.objective <= plan.objective_at_zero + 1e-12 * std::abs(plan.objective_at_zero));
    for (std::size_t k = 0; k < plan.members.size(); ++k) {
      const int j = plan.members[k];
      CHECK(spec.nodes[static_cast<std::size_t>(j)].margin(start.block(j) + plan.deltas[k]) < 0);
    }
    // Stationarity: grad phi_j - A_j^T v agrees across members.
    CHECK(plan.kkt_residual <= 1e-8 * (1 + plan.multiplier.lpNorm<Eigen::Infinity>()));
    CHECK(subproblem_objective(spec, owner, start, plan.deltas) == doctest::Approx(plan.objective));
  }
}

TEST_CASE("iteration cap reports the best plan") {
  ProblemSpec spec = example_problems(2, true);
  spec.rho = 1e-6;
  const Allocation start(spec, {v1(0.25), v1(0.25), v1(0.25), v1(0.25)});
  SubproblemOptions tight;
  tight.max_iterations = 1;
  try {
    solve_subproblem(spec, 1, start, tight);
    FAIL("expected SubproblemNotConverged");
  } catch (const SubproblemNotConverged& e) {
    const ReallocationPlan& best = e.best_plan();
    CHECK_FALSE(best.converged);
    CHECK(best.equality_residual <= 1e-12);
    for (std::size_t k = 0; k < best.members.size(); ++k)
      CHECK(spec.nodes[static_cast<std::size_t>(best.members[k])].margin(start.block(best.members[k]) + best.deltas[k]) < 0);
  }
}
