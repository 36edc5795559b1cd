#include "dfm/io.hpp"

#include "dfm/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dfm {

namespace {

using Json = nlohmann::json;

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'", 0);
  return obj.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number", 0);
  return j.get<double>();
}

Vector vector_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of numbers", 0);
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Index>(k)) = number(j[k], where);
  return v;
}

Matrix matrix_from(const Json& j, Index cols, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of rows", 0);
  Matrix M(static_cast<Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_from(j[r], where);
    if (row.size() != cols) throw ParseError(where + ": row " + std::to_string(r) + " has the wrong length", 0);
    M.row(static_cast<Index>(r)) = row.transpose();
  }
  return M;
}

Json to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Index r = 0; r < M.rows(); ++r) rows.push_back(to_json(Vector(M.row(r).transpose())));
  return rows;
}

CostPtr cost_from(const Json& j, Index dim, const std::string& where) {
  const std::string type = require(j, "type", where).get<std::string>();
  try {
    if (type == "quadratic") {
      std::optional<double> L;
      if (j.contains("L")) L = number(j.at("L"), where + ".L");
      const double c = j.contains("c") ? number(j.at("c"), where + ".c") : 0.0;
      Vector b = j.contains("b") ? vector_from(j.at("b"), where + ".b") : Vector::Zero(dim);
      if (b.size() != dim) throw ParseError(where + ".b: length differs from dim", 0);
      return std::make_shared<QuadraticCost>(matrix_from(require(j, "Q", where), dim, where + ".Q"), std::move(b), c, L);
    }
    if (type == "multi_resource") {
      if (dim != 2) throw ParseError(where + ": multi_resource costs need dim 2", 0);
      return std::make_shared<MultiResourceCost>(number(require(j, "alpha", where), where),
                                                 number(require(j, "beta", where), where),
                                                 number(require(j, "demand", where), where));
    }
    if (type == "sigmoid")
      return std::make_shared<SigmoidCost>(dim, number(require(j, "a", where), where),
                                           number(require(j, "b", where), where), number(require(j, "p", where), where));
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what(), 0);
  }
  throw ParseError(where + ": unknown cost type '" + type + "'", 0);
}

ConstraintPtr constraint_from(const Json& j, Index dim, const std::string& where) {
  const std::string type = require(j, "type", where).get<std::string>();
  try {
    if (type == "affine") {
      Vector a = vector_from(require(j, "a", where), where + ".a");
      if (a.size() != dim) throw ParseError(where + ".a: length differs from dim", 0);
      return std::make_shared<AffineConstraint>(std::move(a), number(require(j, "b", where), where + ".b"));
    }
    if (type == "quadratic") {
      Vector q = vector_from(require(j, "q", where), where + ".q");
      if (q.size() != dim) throw ParseError(where + ".q: length differs from dim", 0);
      return std::make_shared<QuadraticConstraint>(matrix_from(require(j, "P", where), dim, where + ".P"), std::move(q),
                                                   number(require(j, "r", where), where + ".r"));
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what(), 0);
  }
  throw ParseError(where + ": unknown constraint type '" + type + "'", 0);
}

Json cost_to_json(const CostFunction& cost) {
  if (const auto* m = dynamic_cast<const MultiResourceCost*>(&cost))
    return {{"type", "multi_resource"}, {"alpha", m->alpha()}, {"beta", m->beta()}, {"demand", m->demand()}};
  if (const auto* q = dynamic_cast<const QuadraticCost*>(&cost))
    return {{"type", "quadratic"}, {"Q", to_json(q->Q())}, {"b", to_json(q->b())}, {"c", q->c()}, {"L", q->smoothness()}};
  if (const auto* s = dynamic_cast<const SigmoidCost*>(&cost))
    return {{"type", "sigmoid"}, {"a", s->a()}, {"b", s->b()}, {"p", s->p()}};
  throw std::invalid_argument("callback costs cannot be serialized");
}

Json constraint_to_json(const Constraint& g) {
  if (const auto* a = dynamic_cast<const AffineConstraint*>(&g))
    return {{"type", "affine"}, {"a", to_json(a->a())}, {"b", a->b()}};
  if (const auto* q = dynamic_cast<const QuadraticConstraint*>(&g))
    return {{"type", "quadratic"}, {"P", to_json(q->P())}, {"q", to_json(q->q())}, {"r", q->r()}};
  throw std::invalid_argument("callback constraints cannot be serialized");
}

}  // namespace

ProblemSpec parse_instance_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what(), 0);
  }
  try {
    if (doc.contains("format") && doc.at("format") != "dfm-instance")
      throw ParseError("unsupported format '" + doc.at("format").dump() + "'", 0);
    ProblemSpec spec;
    const int n = require(doc, "nodes", "instance").get<int>();
    if (n < 0) throw ParseError("instance: node count must be non-negative", 0);
    spec.graph = Graph(n);
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ParseError("edges: each edge is a pair of node indices", 0);
        try {
          spec.graph.add_edge(e[0].get<int>(), e[1].get<int>());
        } catch (const std::invalid_argument& err) {
          throw ParseError(std::string("edges: ") + err.what(), 0);
        }
      }
    }
    spec.rhs = vector_from(require(doc, "rhs", "instance"), "rhs");
    if (doc.contains("rho")) spec.rho = number(doc.at("rho"), "rho");
    if (doc.contains("beta")) spec.beta = number(doc.at("beta"), "beta");
    if (doc.contains("beta1")) spec.beta1 = number(doc.at("beta1"), "beta1");
    if (doc.contains("f_lower")) spec.f_lower = number(doc.at("f_lower"), "f_lower");
    if (doc.contains("family")) {
      try {
        spec.family = family_from_string(doc.at("family").get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("family: ") + e.what(), 0);
      }
    }
    if (doc.contains("link_users")) spec.link_users = doc.at("link_users").get<std::vector<std::vector<int>>>();

    const Json& locals = require(doc, "locals", "instance");
    if (!locals.is_array() || static_cast<int>(locals.size()) != n)
      throw ParseError("locals: expected one entry per node", 0);
    for (int i = 0; i < n; ++i) {
      const std::string where = "locals[" + std::to_string(i) + "]";
      const Json& entry = locals[static_cast<std::size_t>(i)];
      NodeLocal node;
      node.dim = require(entry, "dim", where).get<Index>();
      if (node.dim <= 0) throw ParseError(where + ": dim must be positive", 0);
      node.coupling = matrix_from(require(entry, "coupling", where), node.dim, where + ".coupling");
      node.cost = cost_from(require(entry, "cost", where), node.dim, where + ".cost");
      if (entry.contains("constraints"))
        for (std::size_t k = 0; k < entry.at("constraints").size(); ++k)
          node.constraints.push_back(constraint_from(entry.at("constraints")[k], node.dim,
                                                     where + ".constraints[" + std::to_string(k) + "]"));
      spec.nodes.push_back(std::move(node));
    }
    return spec;
  } catch (const Json::exception& e) {
    throw ParseError(e.what(), 0);
  }
}

ProblemSpec load_instance_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError("cannot open instance file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance_json(buffer.str());
}

std::string write_instance_json(const ProblemSpec& spec) {
  Json doc;
  doc["format"] = "dfm-instance";
  doc["version"] = 1;
  doc["nodes"] = spec.node_count();
  Json edges = Json::array();
  for (const auto& [i, j] : spec.graph.edges()) edges.push_back({i, j});
  doc["edges"] = edges;
  doc["rhs"] = to_json(spec.rhs);
  doc["rho"] = spec.rho;
  if (spec.beta) doc["beta"] = *spec.beta;
  if (spec.beta1) doc["beta1"] = *spec.beta1;
  if (spec.f_lower) doc["f_lower"] = *spec.f_lower;
  doc["family"] = to_string(spec.family);
  if (!spec.link_users.empty()) doc["link_users"] = spec.link_users;
  Json locals = Json::array();
  for (const auto& node : spec.nodes) {
    Json entry;
    entry["dim"] = node.dim;
    entry["coupling"] = to_json(node.coupling);
    entry["cost"] = cost_to_json(*node.cost);
    Json constraints = Json::array();
    for (const auto& g : node.constraints) constraints.push_back(constraint_to_json(*g));
    entry["constraints"] = constraints;
    locals.push_back(entry);
  }
  doc["locals"] = locals;
  return doc.dump(2) + "\n";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string write_trace_csv(const Trace& trace, bool with_timing) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : trace.records) {
    out += std::to_string(r.round);
    for (double v : {r.F, r.f, r.rhoB, r.grad_W_sq, r.coupling_residual, r.interior_margin, r.descent,
                     with_timing ? r.ms : 0.0}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace dfm
