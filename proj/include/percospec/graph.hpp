#pragma once

#include <span>
#include <utility>
#include <vector>

#include "percospec/types.hpp"

namespace percospec {

/// Undirected edge stored with first < second.
using Edge = std::pair<Index, Index>;

/// Compressed adjacency lists; each neighbor list is sorted ascending.
class Adjacency {
 public:
  Adjacency() = default;
  static Adjacency from_edges(Index vertex_count, std::span<const Edge> edges);

  Index size() const noexcept { return static_cast<Index>(offsets_.size()) - 1; }
  Index degree(Index v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
  std::span<const Index> neighbors(Index v) const noexcept {
    return {targets_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }
  Index edge_count() const noexcept { return static_cast<Index>(targets_.size()) / 2; }
  std::vector<Edge> edges() const;

 private:
  std::vector<Index> offsets_{0};
  std::vector<Index> targets_;
};

struct Components {
  std::vector<Index> label;  ///< component id per vertex, ids in order of first appearance
  std::vector<Index> size;
  Index count() const noexcept { return static_cast<Index>(size.size()); }
};

/// Connected components restricted to vertices with mask[v] != 0 (all vertices
/// when the mask is empty). Masked-out vertices get label -1.
Components connected_components(const Adjacency& graph, std::span<const unsigned char> mask = {});

/// BFS two-colouring. colour[v] is +1 or -1; when the graph is not bipartite
/// `odd_cycle` holds a closed walk of odd length (first vertex not repeated).
struct Bipartition {
  bool bipartite = true;
  std::vector<int> colour;
  std::vector<Index> odd_cycle;
};

Bipartition two_colouring(const Adjacency& graph);

}  // namespace percospec
