#pragma once

#include "dfm/engine.hpp"
#include "dfm/problem.hpp"

#include <string>

namespace dfm {

/// Native JSON instance: graph, coupling blocks, cost descriptors and affine/quadratic constraints.
/// Throws ParseError on malformed or incomplete documents.
ProblemSpec parse_instance_json(const std::string& text);
/// Throws FileNotFoundError when the file cannot be opened.
ProblemSpec load_instance_json(const std::string& path);
/// Throws std::invalid_argument for callback costs or constraints, which have no serial form.
std::string write_instance_json(const ProblemSpec& spec);

inline constexpr const char* kTraceHeader =
    "round,F,f,rhoB,grad_W_sq,coupling_residual,interior_margin,descent,ms";

/// One row per record, values printed with 17 significant digits. The ms column is 0 unless
/// `with_timing` is set, which keeps traces byte-comparable between runs.
std::string write_trace_csv(const Trace& trace, bool with_timing = false);

/// %.17g, with nan and inf spelled out.
std::string format_number(double value);

}  // namespace dfm
