#pragma once

#include "dfm/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dfm {

struct BusRecord {
  int id = 0;
  int type = 1;
  bool operator==(const BusRecord&) const = default;
};

struct GenRecord {
  int bus = 0;
  double pmin = 0;
  double pmax = 0;
  bool operator==(const GenRecord&) const = default;
};

/// Polynomial cost c2 P^2 + c1 P + c0 (model code 2).
struct GenCostRecord {
  int model = 2;
  double c2 = 0;
  double c1 = 0;
  double c0 = 0;
  bool operator==(const GenCostRecord&) const = default;
};

struct BranchRecord {
  int from = 0;
  int to = 0;
  bool operator==(const BranchRecord&) const = default;
};

/// Generators and their costs are aligned: gens[k] is priced by gencosts[k].
struct CaseData {
  std::vector<BusRecord> buses;
  std::vector<GenRecord> gens;
  std::vector<GenCostRecord> gencosts;
  std::vector<BranchRecord> branches;
  /// Rows dropped while parsing, one message each.
  std::vector<std::string> warnings;

  std::size_t generator_count() const noexcept { return gens.size(); }
};

/// Reads the bus, gen, gencost and branch blocks of a MATPOWER case; other blocks are ignored.
/// Generators whose cost row is rejected are dropped with a warning. Throws ParseError.
CaseData parse_matpower_case(const std::string& text);
/// Reads a file; throws FileNotFoundError when it cannot be opened.
CaseData load_matpower_case(const std::string& path);

/// Emits a case with the standard column layout; parse_matpower_case reads it back unchanged.
std::string write_matpower_case(const CaseData& data, const std::string& name = "case");

/// Generators are adjacent when a branch path joins their buses without passing another generator bus.
/// Throws std::invalid_argument when the bus graph is disconnected or a generator references an unknown bus.
Graph derive_generator_graph(const CaseData& data);

/// Deterministic random case: a connected bus network with `gens` generators on distinct buses.
CaseData synthetic_case(int buses, int gens, std::uint64_t seed);

}  // namespace dfm
