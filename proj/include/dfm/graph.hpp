#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace dfm {

using Edge = std::pair<int, int>;

/// Undirected simple graph on nodes 0..n-1. Edges are stored normalized (first < second) and sorted.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int node_count);
  Graph(int node_count, const std::vector<Edge>& edges);

  static Graph line(int node_count);
  static Graph complete(int node_count);
  /// Star with `center` joined to every other node.
  static Graph star(int node_count, int center = 0);

  /// Throws std::invalid_argument on self-loops, duplicates or out-of-range endpoints.
  void add_edge(int i, int j);
  bool has_edge(int i, int j) const;

  int node_count() const noexcept { return node_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// N_i, sorted ascending.
  const std::vector<int>& neighbors(int i) const { return adjacency_.at(static_cast<std::size_t>(i)); }
  /// N_i together with i, sorted ascending.
  std::vector<int> closed_neighborhood(int i) const;
  int closed_degree(int i) const { return static_cast<int>(neighbors(i).size()) + 1; }

  bool is_connected() const;

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

}  // namespace dfm
