#include "dfm/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dfm {

Graph::Graph(int node_count) : node_count_(node_count) {
  if (node_count < 0) throw std::invalid_argument("graph node count must be non-negative");
  adjacency_.resize(static_cast<std::size_t>(node_count));
}

Graph::Graph(int node_count, const std::vector<Edge>& edges) : Graph(node_count) {
  for (const auto& [i, j] : edges) add_edge(i, j);
}

Graph Graph::line(int node_count) {
  Graph g(node_count);
  for (int i = 0; i + 1 < node_count; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph Graph::complete(int node_count) {
  Graph g(node_count);
  for (int i = 0; i < node_count; ++i)
    for (int j = i + 1; j < node_count; ++j) g.add_edge(i, j);
  return g;
}

Graph Graph::star(int node_count, int center) {
  Graph g(node_count);
  for (int i = 0; i < node_count; ++i)
    if (i != center) g.add_edge(center, i);
  return g;
}

void Graph::add_edge(int i, int j) {
  if (i < 0 || j < 0 || i >= node_count_ || j >= node_count_)
    throw std::invalid_argument("edge {" + std::to_string(i) + "," + std::to_string(j) + "} out of range");
  if (i == j) throw std::invalid_argument("self-loop at node " + std::to_string(i));
  Edge e = std::minmax(i, j);
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (pos != edges_.end() && *pos == e)
    throw std::invalid_argument("duplicate edge {" + std::to_string(e.first) + "," + std::to_string(e.second) + "}");
  edges_.insert(pos, e);
  auto insert_sorted = [](std::vector<int>& v, int x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); };
  insert_sorted(adjacency_[static_cast<std::size_t>(i)], j);
  insert_sorted(adjacency_[static_cast<std::size_t>(j)], i);
}

bool Graph::has_edge(int i, int j) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge(std::minmax(i, j)));
}

std::vector<int> Graph::closed_neighborhood(int i) const {
  std::vector<int> out = neighbors(i);
  out.insert(std::lower_bound(out.begin(), out.end(), i), i);
  return out;
}

bool Graph::is_connected() const {
  if (node_count_ <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(node_count_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == node_count_;
}

}  // namespace dfm
