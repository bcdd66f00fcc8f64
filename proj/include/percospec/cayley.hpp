#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "percospec/graph.hpp"
#include "percospec/types.hpp"

namespace percospec {

enum class GroupKind { FreeAbelian, Heisenberg3, Lamplighter };

/// Canonical integer encoding of a group element. Layout per kind:
///   FreeAbelian  (v_1, ..., v_d)
///   Heisenberg3  (a, b, c) for the matrix [[1, a, b], [0, 1, c], [0, 0, 1]]
///   Lamplighter  (x, p_1, v_1, p_2, v_2, ...): walker position x, then the lamp
///                configuration as (position, value) pairs, positions strictly
///                increasing and values in 1..m-1.
/// Equal elements have identical codes, so comparison and hashing are on the code.
struct GroupElement {
  using Code = boost::container::small_vector<std::int32_t, 6>;
  Code code;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend std::strong_ordering operator<=>(const GroupElement& a, const GroupElement& b) {
    return std::lexicographical_compare_three_way(a.code.begin(), a.code.end(), b.code.begin(),
                                                  b.code.end());
  }
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept;
};

std::string to_string(const GroupElement& g);

/// A finitely generated group together with a finite symmetric generator set.
class GroupSpec {
 public:
  /// Z^d with generators +-e_i.
  static GroupSpec free_abelian(int rank);
  static GroupSpec free_abelian(int rank, std::vector<GroupElement> generators);
  /// Integer Heisenberg group with generators +-x, +-y.
  static GroupSpec heisenberg();
  static GroupSpec heisenberg(std::vector<GroupElement> generators);
  /// Z_m wreath Z with the generator set S_0 = {(l d_1, +1)} u {(l d_0, -1)}, l in Z_m.
  static GroupSpec lamplighter(int modulus);
  static GroupSpec lamplighter(int modulus, std::vector<GroupElement> generators);

  /// Lamplighter element from (position, value) pairs and walker position; values
  /// are reduced mod m and the lamp list is put into canonical form.
  static GroupElement lamplighter_element(int modulus, std::vector<std::pair<int, int>> lamps, int x);

  GroupKind kind() const noexcept { return kind_; }
  int rank() const noexcept { return rank_; }
  int modulus() const noexcept { return modulus_; }
  const std::vector<GroupElement>& generators() const noexcept { return generators_; }
  int degree() const noexcept { return static_cast<int>(generators_.size()); }
  /// True when the generators are the kind's default set (S_0 for the lamplighter).
  bool default_generators() const noexcept { return default_generators_; }

  GroupElement identity() const;
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;
  /// Throws DomainError unless the code is a canonical element of this group.
  void validate(const GroupElement& g) const;

  /// Short name such as "free_abelian(2)", "heisenberg3" or "lamplighter(2)".
  std::string name() const;

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;

 private:
  GroupSpec(GroupKind kind, int rank, int modulus, std::vector<GroupElement> generators, bool is_default);
  static std::vector<GroupElement> default_generator_set(GroupKind kind, int rank, int modulus);

  GroupKind kind_;
  int rank_ = 0;
  int modulus_ = 0;
  std::vector<GroupElement> generators_;
  bool default_generators_ = true;
};

/// Vertex budget used when none is given: PERCOSPEC_BUDGET_VERTICES or 2'000'000.
Index default_vertex_budget();

/// A finite vertex set of a Cayley graph with all edges of the Cayley graph
/// between its members (the induced subgraph). Vertex order is the order given
/// at construction.
class CayleyPatch {
 public:
  CayleyPatch(GroupSpec spec, std::vector<GroupElement> vertices);

  const GroupSpec& spec() const noexcept { return spec_; }
  Index size() const noexcept { return static_cast<Index>(vertices_.size()); }
  /// Degree k of the full Cayley graph.
  int degree() const noexcept { return spec_.degree(); }
  const GroupElement& element(Index v) const { return vertices_[v]; }
  const std::vector<GroupElement>& elements() const noexcept { return vertices_; }
  const Adjacency& adjacency() const noexcept { return adjacency_; }
  /// Edges (u < v) in lexicographic order; the bond-percolation item order.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::optional<Index> find(const GroupElement& g) const;

 protected:
  using IndexMap = std::unordered_map<GroupElement, Index, GroupElementHash>;
  CayleyPatch(GroupSpec spec, std::vector<GroupElement> vertices, IndexMap index);

 private:
  void build_edges();

  GroupSpec spec_;
  std::vector<GroupElement> vertices_;
  IndexMap index_;
  Adjacency adjacency_;
  std::vector<Edge> edges_;
};

/// Ball B(n) around the identity; vertices in BFS layer order, each layer sorted
/// by code. Index 0 is the identity.
class CayleyBall : public CayleyPatch {
 public:
  int radius() const noexcept { return radius_; }
  int word_length(Index v) const { return word_length_[v]; }
  const std::vector<int>& word_lengths() const noexcept { return word_length_; }
  /// V(r) = |B(r)| for r = 0..radius.
  const std::vector<Index>& volumes() const noexcept { return volumes_; }

 private:
  friend CayleyBall enumerate_ball(const GroupSpec&, int, Index);
  CayleyBall(GroupSpec spec, std::vector<GroupElement> vertices, IndexMap index, int radius,
             std::vector<int> word_length);

  int radius_;
  std::vector<int> word_length_;
  std::vector<Index> volumes_;
};

CayleyBall enumerate_ball(const GroupSpec& spec, int radius, Index budget = default_vertex_budget());

/// V(n) for n = 0..n_max and the inverse growth function phi(t) = min{n : V(n) > t}.
struct GrowthProfile {
  std::vector<Index> volume;

  int n_max() const noexcept { return static_cast<int>(volume.size()) - 1; }
  /// Throws DomainError when t >= V(n_max) (phi not determined by the table).
  int phi(double t) const;
};

GrowthProfile growth_profile(const GroupSpec& spec, int n_max, Index budget = default_vertex_budget());

/// Induced finite subgraph. `parent_index` maps local vertices to the parent ball
/// when the subgraph was cut out of one; it is empty for standalone subgraphs.
class FiniteSubgraph : public CayleyPatch {
 public:
  FiniteSubgraph(GroupSpec spec, std::vector<GroupElement> vertices, std::vector<Index> parent_index = {});

  const std::vector<Index>& parent_index() const noexcept { return parent_index_; }
  bool connected() const noexcept { return connected_; }

 private:
  std::vector<Index> parent_index_;
  bool connected_;
};

FiniteSubgraph induced_subgraph(const CayleyBall& ball, std::vector<Index> subset);
/// B(r) as a subgraph of a larger ball.
FiniteSubgraph ball_subgraph(const CayleyBall& ball, int r);
/// Path L_n along powers g^j of the first generator, j = -floor((n-1)/2) .. ceil((n-1)/2).
FiniteSubgraph line_subgraph(const CayleyBall& ball, Index n);
/// Same path without a parent ball.
FiniteSubgraph line_subgraph(const GroupSpec& spec, Index n);

/// Vertex set of the lamplighter tetrahedron T_n: {(phi, x) : 0 <= x <= n,
/// supp phi in {1..n}}, ordered by x and then by the lamp word.
std::vector<GroupElement> tetrahedron_elements(int modulus, int depth);
FiniteSubgraph tetrahedron(int modulus, int depth);
FiniteSubgraph tetrahedron(int modulus, int depth, const CayleyBall& ball);

/// Elements within distance R of the given set, input elements first.
std::vector<GroupElement> thicken(const GroupSpec& spec, const std::vector<GroupElement>& elements, int R);

/// Vertices of the patch with at least one Cayley-graph neighbour outside it.
std::vector<Index> inner_vertex_boundary(const CayleyPatch& patch);

Bipartition is_bipartite(const CayleyPatch& patch);

/// Edge list: "# group=<kind> n=<radius> k=<degree>" then "u v" per edge, u < v.
void write_edge_list(std::ostream& out, const CayleyBall& ball);

}  // namespace percospec
