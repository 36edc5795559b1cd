#include "dfm/step_sizes.hpp"

#include <algorithm>
#include <stdexcept>

namespace dfm {

StepSizes step_sizes(const Graph& graph) {
  StepSizes out;
  out.eta.resize(static_cast<std::size_t>(graph.node_count()));
  for (int j = 0; j < graph.node_count(); ++j) {
    int largest = 0;
    for (int l : graph.closed_neighborhood(j)) largest = std::max(largest, graph.closed_degree(l));
    out.eta[static_cast<std::size_t>(j)] = 1.0 / largest;
  }
  if (max_neighborhood_weight(graph, out) > 1.0 + 1e-15)
    throw std::logic_error("step sizes violate the neighborhood weight bound");
  return out;
}

double max_neighborhood_weight(const Graph& graph, const StepSizes& eta) {
  double worst = 0;
  for (int i = 0; i < graph.node_count(); ++i) {
    double sum = 0;
    for (int j : graph.closed_neighborhood(i)) sum += eta[j];
    worst = std::max(worst, sum);
  }
  return worst;
}

}  // namespace dfm
