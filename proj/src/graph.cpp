#include "percospec/graph.hpp"

#include <algorithm>
#include <queue>

namespace percospec {

Adjacency Adjacency::from_edges(Index vertex_count, std::span<const Edge> edges) {
  Adjacency adj;
  adj.offsets_.assign(static_cast<std::size_t>(vertex_count) + 1, 0);
  for (const auto& [u, v] : edges) {
    ++adj.offsets_[u + 1];
    ++adj.offsets_[v + 1];
  }
  for (Index v = 0; v < vertex_count; ++v) adj.offsets_[v + 1] += adj.offsets_[v];
  adj.targets_.resize(static_cast<std::size_t>(adj.offsets_.back()));
  std::vector<Index> fill(adj.offsets_.begin(), adj.offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    adj.targets_[fill[u]++] = v;
    adj.targets_[fill[v]++] = u;
  }
  for (Index v = 0; v < vertex_count; ++v) {
    std::sort(adj.targets_.begin() + adj.offsets_[v], adj.targets_.begin() + adj.offsets_[v + 1]);
  }
  return adj;
}

std::vector<Edge> Adjacency::edges() const {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(edge_count()));
  for (Index u = 0; u < size(); ++u) {
    for (Index v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Components connected_components(const Adjacency& graph, std::span<const unsigned char> mask) {
  const Index n = graph.size();
  auto included = [&](Index v) { return mask.empty() || mask[v] != 0; };
  Components comp;
  comp.label.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  for (Index root = 0; root < n; ++root) {
    if (!included(root) || comp.label[root] >= 0) continue;
    const Index id = comp.count();
    comp.size.push_back(0);
    comp.label[root] = id;
    stack.push_back(root);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      ++comp.size[id];
      for (Index w : graph.neighbors(v)) {
        if (included(w) && comp.label[w] < 0) {
          comp.label[w] = id;
          stack.push_back(w);
        }
      }
    }
  }
  return comp;
}

Bipartition two_colouring(const Adjacency& graph) {
  const Index n = graph.size();
  Bipartition out;
  out.colour.assign(static_cast<std::size_t>(n), 0);
  std::vector<Index> parent(static_cast<std::size_t>(n), -1);
  std::vector<Index> depth(static_cast<std::size_t>(n), 0);
  for (Index root = 0; root < n; ++root) {
    if (out.colour[root] != 0) continue;
    out.colour[root] = 1;
    std::queue<Index> queue;
    queue.push(root);
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop();
      for (Index w : graph.neighbors(v)) {
        if (out.colour[w] == 0) {
          out.colour[w] = -out.colour[v];
          parent[w] = v;
          depth[w] = depth[v] + 1;
          queue.push(w);
        } else if (out.colour[w] == out.colour[v] && out.bipartite) {
          // Walk both BFS-tree branches up to their common ancestor.
          out.bipartite = false;
          std::vector<Index> left{v}, right{w};
          Index a = v, b = w;
          while (depth[a] > depth[b]) left.push_back(a = parent[a]);
          while (depth[b] > depth[a]) right.push_back(b = parent[b]);
          while (a != b) {
            left.push_back(a = parent[a]);
            right.push_back(b = parent[b]);
          }
          right.pop_back();
          out.odd_cycle = left;
          out.odd_cycle.insert(out.odd_cycle.end(), right.rbegin(), right.rend());
        }
      }
    }
  }
  return out;
}

}  // namespace percospec
