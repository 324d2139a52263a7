#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gcsim/plan.hpp"

namespace gcsim {

/// DAG over sub-tasks with its transitive closure.
class ConstructionGraph {
 public:
  using Edge = std::pair<int, int>;

  /// Throws Error(CycleDetected) if the edges contain a cycle.
  ConstructionGraph(int node_count, std::vector<Edge> edges);

  int node_count() const { return n_; }
  std::span<const Edge> edges() const { return edges_; }
  /// reachable(u, v): (u, v) is in the transitive closure.
  bool reachable(int u, int v) const { return closure_[static_cast<std::size_t>(u) * n_ + v] != 0; }
  std::vector<Edge> closure_pairs() const;
  std::vector<int> predecessors(int v) const;

  /// Kahn's algorithm, smallest ready index first.
  std::vector<int> topological_order() const;
  /// Kahn's algorithm choosing among ready nodes with `pick(ready) -> index into ready`.
  template <typename Pick>
  std::vector<int> topological_order(Pick&& pick) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<char> closure_;
};

/// Node per task; edge (u, v) when task v consumes a point or object produced
/// by task u. Provenance: exact coordinate match first, on-object membership second.
ConstructionGraph build_construction_graph(const TaskPlan& plan, double eps = kEpsGeo);

/// True iff every closure pair (u, v) has position(u) < position(v).
/// Throws Error(NotAPermutation) unless `order` permutes the node ids.
bool topo_check(const ConstructionGraph& graph, std::span<const int> order);

template <typename Pick>
std::vector<int> ConstructionGraph::topological_order(Pick&& pick) const {
  std::vector<int> indegree(static_cast<std::size_t>(n_), 0);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_));
  for (const auto& [u, v] : edges_) {
    ++indegree[static_cast<std::size_t>(v)];
    out[static_cast<std::size_t>(u)].push_back(v);
  }
  std::vector<int> ready;
  for (int i = 0; i < n_; ++i) {
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const std::size_t k = pick(std::as_const(ready));
    const int u = ready[k];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(k));
    order.push_back(u);
    for (int v : out[static_cast<std::size_t>(u)]) {
      if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
  }
  return order;
}

}  // namespace gcsim
