#pragma once

#include "dfm/graph.hpp"

#include <vector>

namespace dfm {

/// eta_j = 1 / max_{l in closed nbhd of j} |closed nbhd of l|.
struct StepSizes {
  std::vector<double> eta;

  double operator[](int j) const { return eta.at(static_cast<std::size_t>(j)); }
  std::size_t size() const noexcept { return eta.size(); }
};

StepSizes step_sizes(const Graph& graph);

/// max_i sum_{j in closed nbhd of i} eta_j; at most 1 for the weights above.
double max_neighborhood_weight(const Graph& graph, const StepSizes& eta);

}  // namespace dfm
