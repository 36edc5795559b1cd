#include "dfm/problem.hpp"

#include "dfm/barrier.hpp"
#include "dfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfm {

std::string to_string(ProblemFamily family) {
  switch (family) {
    case ProblemFamily::dispatch: return "dispatch";
    case ProblemFamily::multi_resource: return "multi_resource";
    case ProblemFamily::rate_control: return "rate_control";
    case ProblemFamily::generic: break;
  }
  return "generic";
}

ProblemFamily family_from_string(const std::string& name) {
  if (name == "generic") return ProblemFamily::generic;
  if (name == "dispatch") return ProblemFamily::dispatch;
  if (name == "multi_resource") return ProblemFamily::multi_resource;
  if (name == "rate_control") return ProblemFamily::rate_control;
  throw std::invalid_argument("unknown problem family '" + name + "'");
}

double NodeLocal::margin(const Vector& x) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& g : constraints) m = std::max(m, g->value(x));
  return m;
}

Index ProblemSpec::total_dim() const {
  Index n = 0;
  for (const auto& node : nodes) n += node.dim;
  return n;
}

std::vector<Index> ProblemSpec::offsets() const {
  std::vector<Index> out;
  out.reserve(nodes.size() + 1);
  Index at = 0;
  for (const auto& node : nodes) {
    out.push_back(at);
    at += node.dim;
  }
  out.push_back(at);
  return out;
}

Matrix ProblemSpec::coupling_matrix() const {
  Matrix A(coupling_rows(), total_dim());
  Index at = 0;
  for (const auto& node : nodes) {
    A.middleCols(at, node.dim) = node.coupling;
    at += node.dim;
  }
  return A;
}

int ProblemSpec::max_constraint_count() const {
  int q = 0;
  for (const auto& node : nodes) q = std::max(q, node.constraint_count());
  return q;
}

double ProblemSpec::max_smoothness() const {
  double L = 0;
  for (const auto& node : nodes) L = std::max(L, node.cost->smoothness());
  return L;
}

bool ValidationReport::ok() const {
  return std::none_of(issues.begin(), issues.end(), [](const auto& i) { return i.severity == Severity::error; });
}

bool ValidationReport::has_warnings() const {
  return std::any_of(issues.begin(), issues.end(), [](const auto& i) { return i.severity == Severity::warning; });
}

bool ValidationReport::mentions(const std::string& fragment) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const auto& i) { return i.message.find(fragment) != std::string::npos; });
}

ValidationReport validate_problem(const ProblemSpec& spec) {
  ValidationReport report;
  auto error = [&](std::string m) { report.issues.push_back({Severity::error, std::move(m)}); };
  if (spec.nodes.empty()) error("empty node set");
  if (spec.graph.node_count() != spec.node_count())
    error("node count mismatch: graph has " + std::to_string(spec.graph.node_count()) + " nodes, spec has " +
          std::to_string(spec.node_count()));
  if (!(spec.rho > 0)) error("barrier weight must be positive");
  for (int i = 0; i < spec.node_count(); ++i) {
    const auto& node = spec.nodes[static_cast<std::size_t>(i)];
    const std::string tag = "node " + std::to_string(i) + ": ";
    if (node.dim < 1) error(tag + "dimension must be positive");
    if (!node.cost) {
      error(tag + "missing cost function");
    } else {
      if (node.cost->dim() != node.dim) error(tag + "cost dimension mismatch");
      if (!(node.cost->smoothness() > 0)) error(tag + "non-positive smoothness constant");
    }
    for (const auto& g : node.constraints)
      if (!g || g->dim() != node.dim) error(tag + "constraint dimension mismatch");
    if (node.coupling.cols() != node.dim) error(tag + "coupling block column mismatch");
    if (node.coupling.rows() != spec.coupling_rows())
      error(tag + "coupling row mismatch (" + std::to_string(node.coupling.rows()) + " rows, rhs has " +
            std::to_string(spec.coupling_rows()) + ")");
  }
  if (spec.beta && *spec.beta < 0) error("beta must be non-negative");
  if (spec.beta1 && !(*spec.beta1 > 0)) error("beta1 must be positive");
  for (const auto& users : spec.link_users)
    for (int u : users)
      if (u < 0 || u >= spec.node_count()) error("link user index out of range");
  if (spec.graph.node_count() == spec.node_count() && !spec.graph.is_connected())
    report.issues.push_back({Severity::warning, "graph is disconnected"});
  return report;
}

namespace {

void check_blocks(const ProblemSpec& spec, const BlockVector& x) {
  if (x.size() != spec.nodes.size())
    throw DimensionError("allocation has " + std::to_string(x.size()) + " blocks, spec has " +
                         std::to_string(spec.nodes.size()) + " nodes");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i].size() != spec.nodes[i].dim) throw DimensionError("block " + std::to_string(i) + " has wrong dimension");
}

}  // namespace

Vector coupling_residual(const ProblemSpec& spec, const BlockVector& x) {
  check_blocks(spec, x);
  Vector r = -spec.rhs;
  for (std::size_t i = 0; i < x.size(); ++i) r.noalias() += spec.nodes[i].coupling * x[i];
  return r;
}

Allocation::Allocation(const ProblemSpec& spec, BlockVector blocks)
    : blocks_(std::move(blocks)), residual_(coupling_residual(spec, blocks_)) {
  interior_margin_ = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    interior_margin_ = std::max(interior_margin_, spec.nodes[i].margin(blocks_[i]));
}

Allocation Allocation::from_stacked(const ProblemSpec& spec, const Vector& stacked) {
  if (stacked.size() != spec.total_dim()) throw DimensionError("stacked allocation has wrong length");
  BlockVector blocks;
  Index at = 0;
  for (const auto& node : spec.nodes) {
    blocks.push_back(stacked.segment(at, node.dim));
    at += node.dim;
  }
  return Allocation(spec, std::move(blocks));
}

Vector Allocation::stacked() const {
  Index n = 0;
  for (const auto& b : blocks_) n += b.size();
  Vector out(n);
  Index at = 0;
  for (const auto& b : blocks_) {
    out.segment(at, b.size()) = b;
    at += b.size();
  }
  return out;
}

double Allocation::residual_norm() const { return residual_.size() ? residual_.lpNorm<Eigen::Infinity>() : 0.0; }

bool Allocation::feasible(double tolerance) const {
  return residual_norm() <= tolerance && interior_margin_ <= -kInteriorTolerance;
}

ObjectiveValue evaluate_objective(const ProblemSpec& spec, const BlockVector& x) {
  check_blocks(spec, x);
  ObjectiveValue out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.f += spec.nodes[i].cost->value(x[i]);
    out.B += barrier_value(spec.nodes[i], x[i]);
  }
  out.F = out.f + spec.rho * out.B;
  return out;
}

Vector objective_gradient(const ProblemSpec& spec, const BlockVector& x) {
  check_blocks(spec, x);
  Vector g(spec.total_dim());
  Index at = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& node = spec.nodes[i];
    g.segment(at, node.dim) = node.cost->gradient(x[i]) + spec.rho * barrier_gradient(node, x[i]);
    at += node.dim;
  }
  return g;
}

double surrogate_value(const NodeLocal& node, const Vector& x, const Vector& anchor) {
  const Vector step = x - anchor;
  return node.cost->value(anchor) + node.cost->gradient(anchor).dot(step) +
         0.5 * node.cost->smoothness() * step.squaredNorm();
}

}  // namespace dfm
