#include "gcsim/graph.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "gcsim/error.hpp"

namespace gcsim {

ConstructionGraph::ConstructionGraph(int node_count, std::vector<Edge> edges) : n_(node_count) {
  std::ranges::sort(edges);
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) throw Error(ErrorCode::MalformedSpec, "edge endpoint out of range");
    if (u == v) throw Error(ErrorCode::CycleDetected, "self-loop on node " + std::to_string(u));
  }
  edges_ = std::move(edges);

  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_));
  for (const auto& [u, v] : edges_) out[static_cast<std::size_t>(u)].push_back(v);
  closure_.assign(static_cast<std::size_t>(n_) * n_, 0);
  std::vector<int> stack;
  for (int s = 0; s < n_; ++s) {
    char* row = &closure_[static_cast<std::size_t>(s) * n_];
    stack.assign(out[static_cast<std::size_t>(s)].begin(), out[static_cast<std::size_t>(s)].end());
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (row[u]) continue;
      row[u] = 1;
      for (int v : out[static_cast<std::size_t>(u)]) stack.push_back(v);
    }
    if (row[s]) throw Error(ErrorCode::CycleDetected, "node " + std::to_string(s) + " reaches itself");
  }
}

std::vector<ConstructionGraph::Edge> ConstructionGraph::closure_pairs() const {
  std::vector<Edge> pairs;
  for (int u = 0; u < n_; ++u) {
    for (int v = 0; v < n_; ++v) {
      if (reachable(u, v)) pairs.emplace_back(u, v);
    }
  }
  return pairs;
}

std::vector<int> ConstructionGraph::predecessors(int v) const {
  std::vector<int> p;
  for (const auto& [a, b] : edges_) {
    if (b == v) p.push_back(a);
  }
  return p;
}

std::vector<int> ConstructionGraph::topological_order() const {
  return topological_order([](const std::vector<int>& ready) {
    return static_cast<std::size_t>(std::ranges::min_element(ready) - ready.begin());
  });
}

ConstructionGraph build_construction_graph(const TaskPlan& plan, double eps) {
  // Built in a one-pixel-per-unit window so snapping equals the world tolerance.
  const Viewport world{-1.0, 1.0, -1.0, 1.0, 2, 2};
  const ReferenceConstruction full = build_reference(plan, world, BuildOptions{eps, true, {}});
  const int n = static_cast<int>(plan.tasks.size());

  std::vector<int> creator(full.scene.size(), -1);
  for (int t = 0; t < n; ++t) {
    for (ObjectId id : full.tasks[static_cast<std::size_t>(t)].created) creator[static_cast<std::size_t>(id)] = t;
  }

  std::set<ConstructionGraph::Edge> edges;
  for (int v = 0; v < n; ++v) {
    const Task& task = plan.tasks[static_cast<std::size_t>(v)];
    if (task.function == Function::AddTextLabel || task.function == Function::GenerateInputAction) continue;
    const bool construction = info(task.function).requires_existing;
    // Creator functions may only consume what exists before them; construction
    // functions look at every other task so misordered plans produce back edges.
    const auto eligible = [&](int u) { return u != v && u >= 0 && (construction || u < v); };

    for (std::size_t k = 0; k < task.points.size(); ++k) {
      const Vec2 p = task.points[k];
      const bool host_role = (k == 0 && (task.function == Function::PerpendicularLine || task.function == Function::ParallelLine)) ||
                             (k == 1 && task.function == Function::Tangents);
      int producer = -1;
      if (!host_role) {
        for (const GeoObject& o : full.scene.objects()) {
          const int u = creator[static_cast<std::size_t>(o.id)];
          if (o.is_point() && eligible(u) && distance(o.position(), p) <= eps) {
            if (producer < 0 || u < producer) producer = u;
          }
        }
      }
      if (producer >= 0) {
        edges.emplace(producer, v);
        continue;
      }
      for (const GeoObject& o : full.scene.objects()) {
        const int u = creator[static_cast<std::size_t>(o.id)];
        if (o.is_point() || !eligible(u) || o.variant == Variant::TextLabel || o.variant == Variant::Expression) continue;
        if (host_role && (task.function == Function::Tangents ? o.variant != Variant::Circle : !is_linear(o.variant))) continue;
        if (point_on_object(o, p, eps)) edges.emplace(u, v);
      }
    }
  }
  return ConstructionGraph(n, std::vector<ConstructionGraph::Edge>(edges.begin(), edges.end()));
}

bool topo_check(const ConstructionGraph& graph, std::span<const int> order) {
  const int n = graph.node_count();
  if (static_cast<int>(order.size()) != n) throw Error(ErrorCode::NotAPermutation, "order length differs from node count");
  std::vector<int> position(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int node = order[i];
    if (node < 0 || node >= n || position[static_cast<std::size_t>(node)] >= 0) {
      throw Error(ErrorCode::NotAPermutation, "order is not a permutation of the graph nodes");
    }
    position[static_cast<std::size_t>(node)] = static_cast<int>(i);
  }
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (graph.reachable(u, v) && position[static_cast<std::size_t>(u)] >= position[static_cast<std::size_t>(v)]) return false;
    }
  }
  return true;
}

}  // namespace gcsim
