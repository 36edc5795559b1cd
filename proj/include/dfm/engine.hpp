#pragma once

#include "dfm/local_solver.hpp"
#include "dfm/problem.hpp"
#include "dfm/reachability.hpp"
#include "dfm/step_sizes.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dfm {

struct EngineOptions {
  SubproblemOptions subproblem;
  /// Workers computing plans within a round; results do not depend on it.
  int threads = 1;
  /// Bound on ||A x - c||_inf an update may reach before the round aborts.
  double feasibility_tolerance = 1e-8;
  /// Use the best plan of a subproblem that hit its iteration cap instead of failing the round.
  bool accept_unconverged_plans = false;
};

struct RoundResult {
  Allocation next;
  /// Indexed by owner.
  std::vector<ReallocationPlan> plans;
};

/// One synchronous round: every owner solves its subproblem against `state`, then
/// x_i <- x_i + sum_{j in closed nbhd of i} eta_j p_ji. Throws FeasibilityViolation if the
/// result leaves the feasible set, and propagates SubproblemNotConverged.
RoundResult dfm_round(const ProblemSpec& spec, const Allocation& state, const StepSizes& eta,
                      const EngineOptions& options = {});

/// grad F(x)^T W grad F(x).
double kkt_metric(const ProblemSpec& spec, const Allocation& x, const Matrix& W);

struct TraceRecord {
  int round = 0;
  double F = 0;
  double f = 0;
  double rhoB = 0;
  /// ||grad F||_W^2; NaN when W was not formed.
  double grad_W_sq = 0;
  /// ||A x - c||_inf.
  double coupling_residual = 0;
  double interior_margin = 0;
  /// F(x^k) - F(x^{k+1}); NaN on the final record.
  double descent = 0;
  /// Wall time of the round that produced this iterate.
  double ms = 0;
};

struct Trace {
  std::vector<TraceRecord> records;
};

/// Metrics of one iterate; descent is left NaN and ms at 0. Off the strict interior F and rhoB are
/// +infinity and the W-metric is NaN. W may be null.
TraceRecord make_record(const ProblemSpec& spec, int round, const Allocation& x, const Matrix* W);

struct StoppingRule {
  int max_rounds = 1000;
  /// Stop once ||grad F||_W^2 (or the per-round descent when W is unavailable) falls to this level.
  double tolerance = 1e-12;
};

struct RunResult {
  Trace trace;
  Allocation final_state;
  StepSizes eta;
  std::optional<WeightingMatrix> weighting;
  bool stopped_by_tolerance = false;
};

/// Algorithm driver. Throws InfeasibleStartError unless x0 is strictly feasible.
RunResult run(const ProblemSpec& spec, const Allocation& x0, const StoppingRule& stop = {},
              const EngineOptions& options = {});

/// Inputs for the runtime verification of the convergence guarantees.
struct BoundInputs {
  std::optional<double> f_lower;
  std::optional<double> beta;
  std::optional<double> beta1;
  std::optional<double> lambda_W;
  /// Common strong convexity modulus of the f_i.
  std::optional<double> sigma;
  /// Optimal value of the barrier problem.
  std::optional<double> F_star;
  /// Rate ratios are only formed while F(x^k) - F* exceeds this floor.
  double gap_floor = 1e-9;
};

struct BoundCheck {
  std::string name;
  bool applicable = false;
  bool holds = true;
  /// Largest observed lhs - rhs (<= 0 when the bound holds with margin).
  double worst_slack = 0;
  std::string detail;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  double L = 0;
  double L_B = 0;

  bool all_hold() const;
  const BoundCheck* find(const std::string& name) const;
};

/// L_B for this instance, or nullopt when beta, beta1 or f_lower is missing.
std::optional<double> instance_LB(const ProblemSpec& spec, double F0, const BoundInputs& inputs);

/// Feasibility, monotone descent, per-round descent inequality, telescoped gradient bound and linear rate.
BoundReport check_bounds(const ProblemSpec& spec, const Trace& trace, const BoundInputs& inputs);

/// Fills BoundInputs from the spec (beta, beta1, f_lower) and the run (lambda_W).
BoundInputs bound_inputs_from(const ProblemSpec& spec, const RunResult& result);

}  // namespace dfm
