#include "dfm/engine.hpp"

#include "dfm/barrier.hpp"
#include "dfm/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace dfm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<ReallocationPlan> solve_all(const ProblemSpec& spec, const Allocation& state,
                                        const EngineOptions& options) {
  const int n = spec.node_count();
  std::vector<ReallocationPlan> plans(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

  auto work = [&](int first, int stride) {
    for (int i = first; i < n; i += stride) {
      auto slot = static_cast<std::size_t>(i);
      try {
        plans[slot] = solve_subproblem(spec, i, state, options.subproblem);
      } catch (const SubproblemNotConverged& e) {
        if (options.accept_unconverged_plans)
          plans[slot] = e.best_plan();
        else
          errors[slot] = std::current_exception();
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    }
  };

  const int workers = std::clamp(options.threads, 1, std::max(1, n));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  // Lowest owner first, whatever the scheduling.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return plans;
}

}  // namespace

RoundResult dfm_round(const ProblemSpec& spec, const Allocation& state, const StepSizes& eta,
                      const EngineOptions& options) {
  std::vector<ReallocationPlan> plans = solve_all(spec, state, options);

  BlockVector next = state.blocks();
  for (int i = 0; i < spec.node_count(); ++i) {
    Vector& xi = next[static_cast<std::size_t>(i)];
    for (int j : spec.graph.closed_neighborhood(i)) xi += eta[j] * plans[static_cast<std::size_t>(j)].delta_for(i);
  }
  Allocation updated(spec, std::move(next));
  if (!(updated.residual_norm() <= options.feasibility_tolerance))
    throw FeasibilityViolation("coupling residual " + std::to_string(updated.residual_norm()) +
                               " exceeds the feasibility tolerance");
  if (spec.has_barriers() && !(updated.interior_margin() < 0))
    throw FeasibilityViolation("update left the interior of the local constraint sets");
  return {std::move(updated), std::move(plans)};
}

double kkt_metric(const ProblemSpec& spec, const Allocation& x, const Matrix& W) {
  const Vector g = objective_gradient(spec, x.blocks());
  return g.dot(W * g);
}

TraceRecord make_record(const ProblemSpec& spec, int round, const Allocation& x, const Matrix* W) {
  TraceRecord r;
  r.round = round;
  r.coupling_residual = x.residual_norm();
  r.interior_margin = x.interior_margin();
  r.descent = kNaN;
  r.ms = 0;
  if (!spec.has_barriers() || x.interior_margin() < 0) {
    const ObjectiveValue obj = evaluate_objective(spec, x);
    r.F = obj.F;
    r.f = obj.f;
    r.rhoB = spec.rho * obj.B;
    r.grad_W_sq = W ? kkt_metric(spec, x, *W) : kNaN;
  } else {
    r.f = 0;
    for (int i = 0; i < spec.node_count(); ++i) r.f += spec.nodes[static_cast<std::size_t>(i)].cost->value(x.block(i));
    r.F = r.rhoB = std::numeric_limits<double>::infinity();
    r.grad_W_sq = kNaN;
  }
  return r;
}

RunResult run(const ProblemSpec& spec, const Allocation& x0, const StoppingRule& stop, const EngineOptions& options) {
  if (!(x0.residual_norm() <= kFeasibilityTolerance))
    throw InfeasibleStartError("initial allocation violates the coupling constraint (residual " +
                               std::to_string(x0.residual_norm()) + ")");
  if (spec.has_barriers() && !(x0.interior_margin() <= -kInteriorTolerance))
    throw InfeasibleStartError("initial allocation is not strictly inside the local constraint sets");

  StepSizes eta = step_sizes(spec.graph);
  std::optional<WeightingMatrix> weighting;
  if (spec.total_dim() <= kDenseDiagnosticsCap) weighting = weighting_matrix(spec, eta);

  const Matrix* W = weighting ? &weighting->W : nullptr;
  auto record_for = [&](int k, const Allocation& x, double ms) {
    TraceRecord r = make_record(spec, k, x, W);
    r.ms = ms;
    return r;
  };

  RunResult result{Trace{}, x0, eta, weighting, false};
  result.trace.records.push_back(record_for(0, x0, 0.0));
  for (int k = 0; k < stop.max_rounds; ++k) {
    const TraceRecord& last = result.trace.records.back();
    const double metric = weighting ? last.grad_W_sq : (k > 0 ? result.trace.records[k - 1].descent : kNaN);
    if (metric <= stop.tolerance) {
      result.stopped_by_tolerance = true;
      break;
    }
    const auto start = std::chrono::steady_clock::now();
    RoundResult round = dfm_round(spec, result.final_state, eta, options);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    TraceRecord next = record_for(k + 1, round.next, ms);
    result.trace.records.back().descent = last.F - next.F;
    result.trace.records.push_back(next);
    result.final_state = std::move(round.next);
  }
  return result;
}

bool BoundReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return !c.applicable || c.holds; });
}

const BoundCheck* BoundReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::optional<double> instance_LB(const ProblemSpec& spec, double F0, const BoundInputs& inputs) {
  const int q_max = spec.max_constraint_count();
  if (q_max == 0) return 0.0;
  if (!inputs.beta || !inputs.beta1 || !inputs.f_lower) return std::nullopt;
  return smoothness_constant_LB(F0 - *inputs.f_lower, spec.rho, *inputs.beta, *inputs.beta1, q_max);
}

BoundReport check_bounds(const ProblemSpec& spec, const Trace& trace, const BoundInputs& inputs) {
  BoundReport report;
  const auto& rec = trace.records;
  report.L = spec.max_smoothness();

  BoundCheck feasibility{"feasibility", true, true, -std::numeric_limits<double>::infinity(), ""};
  for (const auto& r : rec) {
    feasibility.worst_slack = std::max(feasibility.worst_slack, r.coupling_residual - 1e-8);
    if (!(r.coupling_residual <= 1e-8) || (spec.has_barriers() && !(r.interior_margin < 0))) feasibility.holds = false;
  }
  feasibility.detail = "||Ax-c||_inf <= 1e-8 and interior margin < 0 on every record";
  report.checks.push_back(feasibility);

  BoundCheck monotone{"monotone_descent", rec.size() > 1, true, -std::numeric_limits<double>::infinity(),
                      "F(x^{k+1}) <= F(x^k) + 1e-10"};
  for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
    const double slack = rec[k + 1].F - rec[k].F - 1e-10;
    monotone.worst_slack = std::max(monotone.worst_slack, slack);
    if (slack > 0) monotone.holds = false;
  }
  report.checks.push_back(monotone);

  const bool have_metric = !rec.empty() && !std::isnan(rec.front().grad_W_sq);
  const std::optional<double> LB = rec.empty() ? std::nullopt : instance_LB(spec, rec.front().F, inputs);
  report.L_B = LB.value_or(kNaN);
  const bool bounded = have_metric && LB.has_value() && (spec.max_constraint_count() == 0 || inputs.f_lower);
  const double curvature = bounded ? report.L + spec.rho * *LB : kNaN;

  BoundCheck per_round{"descent_inequality", bounded && rec.size() > 1, true, -std::numeric_limits<double>::infinity(),
                       "F(x^{k+1}) - F(x^k) <= -||grad F||_W^2 / (2(L + rho L_B)) + 1e-8"};
  if (per_round.applicable) {
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
      const double slack = (rec[k + 1].F - rec[k].F) + rec[k].grad_W_sq / (2 * curvature) - 1e-8;
      per_round.worst_slack = std::max(per_round.worst_slack, slack);
      if (slack > 0) per_round.holds = false;
    }
  }
  report.checks.push_back(per_round);

  BoundCheck telescoped{"telescoped_gradient_bound", bounded && inputs.f_lower.has_value(), true,
                        -std::numeric_limits<double>::infinity(),
                        "sum_k ||grad F(x^k)||_W^2 <= 2(rho L_B + L)(F(x^0) - f_lower)"};
  if (telescoped.applicable) {
    const double budget = 2 * curvature * (rec.front().F - *inputs.f_lower);
    double running = 0;
    for (const auto& r : rec) {
      running += r.grad_W_sq;
      telescoped.worst_slack = std::max(telescoped.worst_slack, running - budget);
    }
    telescoped.holds = telescoped.worst_slack <= 0;
  }
  report.checks.push_back(telescoped);

  BoundCheck rate{"linear_rate", bounded && inputs.sigma && inputs.F_star && inputs.lambda_W && rec.size() > 1, true,
                  -std::numeric_limits<double>::infinity(),
                  "(F(x^{k+1}) - F*) / (F(x^k) - F*) <= 1 - sigma lambda_W / (L + rho L_B) + 1e-8"};
  if (rate.applicable) {
    const double factor = 1 - *inputs.sigma * *inputs.lambda_W / curvature;
    int formed = 0;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
      const double gap = rec[k].F - *inputs.F_star;
      if (gap <= inputs.gap_floor) break;
      const double ratio = (rec[k + 1].F - *inputs.F_star) / gap;
      const double slack = ratio - factor - 1e-8;
      rate.worst_slack = std::max(rate.worst_slack, slack);
      if (slack > 0) rate.holds = false;
      ++formed;
    }
    rate.detail += " (" + std::to_string(formed) + " ratios above the gap floor)";
  }
  report.checks.push_back(rate);
  return report;
}

BoundInputs bound_inputs_from(const ProblemSpec& spec, const RunResult& result) {
  BoundInputs in;
  in.f_lower = spec.f_lower;
  in.beta = spec.beta;
  in.beta1 = spec.beta1;
  if (result.weighting) in.lambda_W = result.weighting->lambda_min_nonzero;
  return in;
}

}  // namespace dfm
