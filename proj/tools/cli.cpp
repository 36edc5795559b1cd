#include "cli.hpp"

#include "dfm/barrier.hpp"
#include "dfm/baselines.hpp"
#include "dfm/benchmarks.hpp"
#include "dfm/centralized.hpp"
#include "dfm/engine.hpp"
#include "dfm/errors.hpp"
#include "dfm/io.hpp"
#include "dfm/reachability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dfm::cli {

namespace {

using Json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceOptions {
  std::string builtin;
  std::string instance;
  std::string case_file;
  double demand = kNaN;
  bool add_edge_14 = false;
  std::uint64_t seed = 1;
};

struct RunOptions {
  SourceOptions source;
  std::string method = "dfm";
  std::optional<double> rho;
  std::optional<double> epsilon;
  std::string rho_list;
  int rounds = 1000;
  double tolerance = 1e-12;
  int threads = 1;
  std::string x0;
  bool timing = false;
  std::string out_dir;
  std::string name = "run";
};

struct LoadedInstance {
  ProblemSpec spec;
  std::string label;
  std::vector<std::string> warnings;
  /// The counterexamples start from (0, 0, 0, 1).
  bool counterexample = false;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw UsageError("malformed number '" + item + "' in " + what);
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(what + " is empty");
  return values;
}

LoadedInstance load_instance(const SourceOptions& src) {
  const int sources = !src.builtin.empty() + !src.instance.empty() + !src.case_file.empty();
  if (sources != 1) throw UsageError("exactly one of --builtin, --instance, --case is required");
  if (src.add_edge_14 && src.builtin != "example1" && src.builtin != "example2")
    throw UsageError("--add-edge-14 applies to the example builtins only");

  LoadedInstance loaded;
  if (!src.instance.empty()) {
    loaded.spec = load_instance_json(src.instance);
    loaded.label = src.instance;
    return loaded;
  }
  if (!src.case_file.empty()) {
    if (std::isnan(src.demand)) throw UsageError("--case needs --demand");
    const CaseData data = load_matpower_case(src.case_file);
    loaded.spec = gen_economic_dispatch(data, src.demand);
    loaded.warnings = data.warnings;
    loaded.label = src.case_file;
    return loaded;
  }

  const std::string& name = src.builtin;
  loaded.label = name;
  if (name == "example1" || name == "example2") {
    loaded.spec = example_problems(name == "example1" ? 1 : 2, src.add_edge_14);
    loaded.counterexample = true;
  } else if (name == "dispatch") {
    const CaseData data = synthetic_case(118, 54, src.seed);
    double demand = src.demand;
    if (std::isnan(demand)) {
      demand = 0;
      for (const auto& g : data.gens) demand += 0.5 * (g.pmin + g.pmax);
    }
    loaded.spec = gen_economic_dispatch(data, demand);
  } else if (name == "multi-resource") {
    loaded.spec = gen_multi_resource(random_connected_graph(20, 0.15, src.seed), random_multi_resource_nodes(20, 8, src.seed));
  } else if (name == "rate-control") {
    const RateNetwork net = chain_rate_network();
    loaded.spec = gen_rate_control(net, random_sigmoid_params(net, src.seed));
  } else {
    throw UsageError("unknown builtin '" + name + "'");
  }
  return loaded;
}

void add_source_options(CLI::App& cmd, SourceOptions& src) {
  cmd.add_option("--builtin", src.builtin, "example1 | example2 | dispatch | multi-resource | rate-control");
  cmd.add_option("--instance", src.instance, "native JSON instance file");
  cmd.add_option("--case", src.case_file, "MATPOWER case file (economic dispatch)");
  cmd.add_option("--demand", src.demand, "total demand for --case or the dispatch builtin");
  cmd.add_flag("--add-edge-14", src.add_edge_14, "add the edge between the end nodes of the examples");
  cmd.add_option("--seed", src.seed, "seed for randomly generated builtins");
}

int report_validation(const ProblemSpec& spec, std::ostream& out, std::ostream& err) {
  const ValidationReport report = validate_problem(spec);
  for (const auto& issue : report.issues)
    (issue.severity == Severity::error ? err : out)
        << (issue.severity == Severity::error ? "error: " : "warning: ") << issue.message << '\n';
  return report.ok() ? kOk : kValidationFailure;
}

Json blocks_to_json(const BlockVector& blocks) {
  Json arr = Json::array();
  for (const auto& b : blocks) arr.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  return arr;
}

double max_change(const BlockVector& a, const BlockVector& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).lpNorm<Eigen::Infinity>());
  return worst;
}

Json reachability_json(const ProblemSpec& spec) {
  Json j;
  const Lemma1Verdict lemma = check_lemma1_shortcut(spec);
  j["shortcut_applies"] = lemma.applies;
  j["shortcut_reason"] = lemma.reason;
  if (spec.total_dim() <= kDenseDiagnosticsCap) {
    const ReachabilityReport r = check_reachability(spec);
    j["holds"] = r.holds;
    j["dim_sum"] = r.dim_sum;
    j["dim_null"] = r.dim_null_A;
  } else {
    j["holds"] = lemma.applies ? Json(true) : Json(nullptr);
  }
  return j;
}

struct Outcome {
  std::string csv;
  Json summary;
};

Outcome execute(const ProblemSpec& spec, const LoadedInstance& loaded, const RunOptions& opt) {
  const bool dfm = opt.method == "dfm";
  const bool constrained = opt.method == "naive-constrained";

  std::optional<Allocation> start;
  if (!opt.x0.empty()) {
    const std::vector<double> values = parse_list(opt.x0, "--x0");
    if (static_cast<Index>(values.size()) != spec.total_dim())
      throw UsageError("--x0 needs " + std::to_string(spec.total_dim()) + " entries");
    start = Allocation::from_stacked(spec, Eigen::Map<const Vector>(values.data(), spec.total_dim()));
  } else if (loaded.counterexample) {
    BlockVector corner(4, Vector::Zero(1));
    corner[3](0) = 1;
    Allocation candidate(spec, corner);
    if (!dfm || !spec.has_barriers()) start = candidate;
  }
  if (!start) start = feasible_initialization(spec);

  RunResult result = [&] {
    if (dfm) {
      EngineOptions engine;
      engine.threads = opt.threads;
      return run(spec, *start, {opt.rounds, opt.tolerance}, engine);
    }
    if (!(start->residual_norm() <= kFeasibilityTolerance))
      throw InfeasibleStartError("initial allocation violates the coupling constraint");
    if (constrained && start->interior_margin() > kInteriorTolerance)
      throw InfeasibleStartError("initial allocation violates a local constraint");
    return run_pairwise(spec, *start, opt.rounds, default_edge_weights(spec.graph), constrained);
  }();

  Json s;
  s["instance"] = loaded.label;
  s["method"] = opt.method;
  s["rho"] = spec.rho;
  s["rounds_run"] = static_cast<int>(result.trace.records.size()) - 1;
  s["stopped_by_tolerance"] = result.stopped_by_tolerance;
  s["initial_allocation"] = blocks_to_json(start->blocks());
  s["final_allocation"] = blocks_to_json(result.final_state.blocks());
  const TraceRecord& last = result.trace.records.back();
  s["objective"] = {{"F", last.F}, {"f", last.f}, {"rhoB", last.rhoB}};
  s["feasibility"] = {{"coupling_residual", last.coupling_residual},
                      {"interior_margin", last.interior_margin},
                      {"feasible", last.coupling_residual <= 1e-8 && (!spec.has_barriers() || last.interior_margin < 0)}};
  s["reachability"] = reachability_json(spec);
  s["warnings"] = loaded.warnings;
  const std::optional<double> lower = spec.f_lower ? spec.f_lower : default_lower_bound(spec);
  s["f_lower"] = lower ? Json(*lower) : Json(nullptr);

  // Reference optimum: the barrier problem at this rho for DFM, a near-zero rho for the baselines.
  std::optional<CentralizedSolution> reference;
  try {
    ProblemSpec ref_spec = spec;
    if (!dfm && spec.has_barriers()) ref_spec.rho = 1e-8;
    CentralizedSolution solved = solve_barrier_problem(ref_spec, feasible_initialization(ref_spec));
    if (solved.converged) reference = std::move(solved);
  } catch (const Error&) {
  }

  // One more update from the final state tells whether the method has stopped moving.
  double movement = kNaN;
  try {
    if (dfm) {
      movement = max_change(dfm_round(spec, result.final_state, result.eta).next.blocks(), result.final_state.blocks());
    } else {
      movement = max_change(
          pairwise_update(spec, result.final_state, default_edge_weights(spec.graph), constrained).blocks(),
          result.final_state.blocks());
    }
  } catch (const Error&) {
  }
  const bool fixed = movement <= 1e-12;
  s["fixed_point"] = fixed;
  s["last_movement"] = movement;
  if (reference) {
    const double value = dfm ? last.F : last.f;
    const double ref = dfm ? reference->value.F : reference->value.f;
    s["reference"] = {{"value", ref}, {"allocation", blocks_to_json(reference->x.blocks())}, {"gap", value - ref}};
    s["stationary_at_non_optimal_point"] = fixed && value - ref > 1e-6 * (1 + std::abs(ref));
  } else {
    s["reference"] = nullptr;
    s["stationary_at_non_optimal_point"] = nullptr;
  }

  if (dfm) {
    BoundInputs inputs = bound_inputs_from(spec, result);
    double sigma = std::numeric_limits<double>::infinity();
    for (const auto& node : spec.nodes) sigma = std::min(sigma, node.cost->strong_convexity());
    if (sigma > 0 && std::isfinite(sigma)) inputs.sigma = sigma;
    if (reference) inputs.F_star = reference->value.F;
    const BoundReport bounds = check_bounds(spec, result.trace, inputs);
    Json checks = Json::array();
    for (const auto& c : bounds.checks)
      checks.push_back({{"name", c.name}, {"applicable", c.applicable}, {"holds", c.holds},
                        {"worst_slack", c.worst_slack}, {"detail", c.detail}});
    s["bounds"] = {{"L", bounds.L}, {"L_B", bounds.L_B}, {"all_hold", bounds.all_hold()}, {"checks", checks}};
    if (result.weighting) s["lambda_W"] = result.weighting->lambda_min_nonzero;
  }
  return {write_trace_csv(result.trace, opt.timing), s};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FileNotFoundError("cannot write " + path.string());
  out << text;
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.method != "dfm" && opt.method != "naive" && opt.method != "naive-constrained")
    throw UsageError("unknown method '" + opt.method + "'");
  if ((opt.rho.has_value() + opt.epsilon.has_value() + !opt.rho_list.empty()) > 1)
    throw UsageError("--rho, --epsilon and --rho-list are mutually exclusive");
  if (opt.rounds < 0) throw UsageError("--rounds must be non-negative");
  if (opt.threads < 1) throw UsageError("--threads must be at least 1");

  LoadedInstance loaded = load_instance(opt.source);
  if (const int status = report_validation(loaded.spec, out, err); status != kOk) return status;
  for (const auto& w : loaded.warnings) out << "warning: " << w << '\n';

  std::vector<double> rhos;
  if (opt.rho) {
    rhos.push_back(*opt.rho);
  } else if (!opt.rho_list.empty()) {
    rhos = parse_list(opt.rho_list, "--rho-list");
  } else if (opt.epsilon) {
    const ProblemSpec& spec = loaded.spec;
    const Allocation xprime = feasible_initialization(spec);
    double f = 0, B = 0;
    for (int i = 0; i < spec.node_count(); ++i) {
      const auto& node = spec.nodes[static_cast<std::size_t>(i)];
      f += node.cost->value(xprime.block(i));
      if (!node.constraints.empty()) B += barrier_value(node, xprime.block(i));
    }
    const std::optional<double> lower = spec.f_lower ? spec.f_lower : default_lower_bound(spec);
    if (!lower) throw UsageError("--epsilon needs a lower bound on the optimal value (f_lower)");
    if (B > 0) {
      rhos.push_back(rho_for_accuracy(*opt.epsilon, f, std::min(*lower, f), B));
      out << "rho for accuracy " << format_number(*opt.epsilon) << ": " << format_number(rhos.back())
          << " (f_lower " << format_number(*lower) << ")\n";
    } else {
      rhos.push_back(spec.rho);
    }
  } else {
    rhos.push_back(loaded.spec.rho);
  }
  for (double r : rhos)
    if (!(r > 0)) throw UsageError("rho must be positive");

  std::string dir = opt.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("DFM_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  std::filesystem::create_directories(dir);

  for (std::size_t k = 0; k < rhos.size(); ++k) {
    ProblemSpec spec = loaded.spec;
    spec.rho = rhos[k];
    const Outcome outcome = execute(spec, loaded, opt);
    const std::string stem = rhos.size() > 1 ? opt.name + "_rho" + std::to_string(k) : opt.name;
    const auto csv = std::filesystem::path(dir) / (stem + ".csv");
    const auto json = std::filesystem::path(dir) / (stem + ".json");
    write_file(csv, outcome.csv);
    write_file(json, outcome.summary.dump(2) + "\n");
    const Json& obj = outcome.summary["objective"];
    out << opt.method << " rho=" << format_number(spec.rho) << " rounds=" << outcome.summary["rounds_run"].get<int>()
        << " F=" << format_number(obj["F"].get<double>()) << " f=" << format_number(obj["f"].get<double>())
        << " feasible=" << (outcome.summary["feasibility"]["feasible"].get<bool>() ? "yes" : "no");
    if (outcome.summary["stationary_at_non_optimal_point"] == true) out << " [stationary at non-optimal point]";
    out << "\n  trace " << csv.string() << "\n  summary " << json.string() << '\n';
  }
  return kOk;
}

int cmd_check(const SourceOptions& src, std::ostream& out, std::ostream& err) {
  LoadedInstance loaded = load_instance(src);
  const ProblemSpec& spec = loaded.spec;
  if (const int status = report_validation(spec, out, err); status != kOk) return status;

  const Lemma1Verdict lemma = check_lemma1_shortcut(spec);
  out << "rank shortcut: " << (lemma.applies ? "applies" : "does not apply");
  if (!lemma.reason.empty()) out << " (" << lemma.reason << ")";
  out << '\n';

  bool holds = lemma.applies;
  if (spec.total_dim() <= kDenseDiagnosticsCap) {
    const ReachabilityReport r = check_reachability(spec);
    holds = r.holds;
    out << "dim sum " << r.dim_sum << (r.dim_sum < r.dim_null_A ? " < " : " = ") << "dim null " << r.dim_null_A
        << '\n';
    const WeightingMatrix W = weighting_matrix(spec, step_sizes(spec.graph));
    out << "lambda_W " << format_number(W.lambda_min_nonzero) << '\n';
  } else if (!lemma.applies) {
    out << "instance too large for the dense rank test\n";
  }
  out << "reachability: " << (holds ? "holds" : "fails") << '\n';
  return holds ? kOk : kCheckFailed;
}

struct GenerateOptions {
  SourceOptions source;
  int buses = 118;
  int gens = 54;
  bool synthetic_case = false;
  std::string out;
};

int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  std::string text;
  if (opt.synthetic_case) {
    text = write_matpower_case(synthetic_case(opt.buses, opt.gens, opt.source.seed), "case_synthetic");
  } else {
    text = write_instance_json(load_instance(opt.source).spec);
  }
  if (opt.out.empty()) {
    out << text;
  } else {
    write_file(opt.out, text);
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed feasible resource allocation: run, check and generate instances"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "run DFM or a pairwise baseline and write a trace and summary");
  add_source_options(*run_cmd, run_opt.source);
  run_cmd->add_option("--method", run_opt.method, "dfm | naive | naive-constrained");
  run_cmd->add_option("--rho", run_opt.rho, "barrier weight");
  run_cmd->add_option("--epsilon", run_opt.epsilon, "accuracy target; picks rho automatically");
  run_cmd->add_option("--rho-list", run_opt.rho_list, "comma-separated rho values, one run each");
  run_cmd->add_option("--rounds", run_opt.rounds, "round cap");
  run_cmd->add_option("--tol", run_opt.tolerance, "stop once ||grad F||_W^2 falls to this level");
  run_cmd->add_option("--threads", run_opt.threads, "workers per round; results do not depend on it");
  run_cmd->add_option("--x0", run_opt.x0, "comma-separated starting allocation (stacked)");
  run_cmd->add_flag("--timing", run_opt.timing, "record wall time per round in the ms column");
  run_cmd->add_option("--out", run_opt.out_dir, "output directory (default $DFM_OUT_DIR or .)");
  run_cmd->add_option("--name", run_opt.name, "file stem for the trace and summary");

  SourceOptions check_src;
  CLI::App* check_cmd = app.add_subcommand("check", "test whether local moves can reach every feasible point");
  add_source_options(*check_cmd, check_src);

  GenerateOptions gen_opt;
  CLI::App* gen_cmd = app.add_subcommand("generate", "write a builtin instance as JSON or a synthetic MATPOWER case");
  add_source_options(*gen_cmd, gen_opt.source);
  gen_cmd->add_flag("--synthetic-case", gen_opt.synthetic_case, "emit a MATPOWER case instead of an instance");
  gen_cmd->add_option("--buses", gen_opt.buses, "buses in the synthetic case");
  gen_cmd->add_option("--gens", gen_opt.gens, "generators in the synthetic case");
  gen_cmd->add_option("--out", gen_opt.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_opt, out, err);
    if (*check_cmd) return cmd_check(check_src, out, err);
    return cmd_generate(gen_opt, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const FileNotFoundError& e) {
    err << "error: " << e.what() << '\n';
    return kFileNotFound;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseFailure;
  } catch (const InfeasibleStartError& e) {
    err << "infeasible start: " << e.what() << '\n';
    return kInfeasibleStart;
  } catch (const std::invalid_argument& e) {
    err << "invalid instance: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const DimensionError& e) {
    err << "invalid instance: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
}

}  // namespace dfm::cli
