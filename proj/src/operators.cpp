#include "percospec/operators.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "percospec/errors.hpp"
#include "percospec/format.hpp"

namespace percospec {

namespace {

using Triplet = Eigen::Triplet<double, Eigen::Index>;

LabeledOperator from_triplets(std::vector<Index> index_set, const std::vector<Triplet>& triplets, OperatorTag tag,
                              int degree) {
  LabeledOperator op;
  const auto n = static_cast<Eigen::Index>(index_set.size());
  op.index_set = std::move(index_set);
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  op.tag = tag;
  op.degree = degree;
  return op;
}

double diagonal_entry(BoundaryCondition bc, int k, Index d) {
  switch (bc) {
    case BoundaryCondition::Adjacency: return k;
    case BoundaryCondition::Dirichlet: return 2.0 * k - static_cast<double>(d);
    case BoundaryCondition::Neumann: return static_cast<double>(d);
  }
  return 0;
}

// Laplacian over `vertices` (ids in `graph`) using the edges of `graph` among them.
LabeledOperator graph_laplacian(const Adjacency& graph, std::vector<Index> vertices, int k, BoundaryCondition bc,
                                OperatorTag tag) {
  std::unordered_map<Index, Index> row;
  row.reserve(vertices.size());
  for (Index r = 0; r < static_cast<Index>(vertices.size()); ++r) row.emplace(vertices[r], r);
  std::vector<Triplet> triplets;
  for (Index r = 0; r < static_cast<Index>(vertices.size()); ++r) {
    Index d = 0;
    for (Index w : graph.neighbors(vertices[r])) {
      if (auto it = row.find(w); it != row.end()) {
        triplets.emplace_back(r, it->second, -1.0);
        ++d;
      }
    }
    triplets.emplace_back(r, r, diagonal_entry(bc, k, d));
  }
  return from_triplets(std::move(vertices), triplets, tag, k);
}

std::vector<Index> all_vertices(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

std::string to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::Adjacency: return "adjacency";
    case BoundaryCondition::Dirichlet: return "dirichlet";
    case BoundaryCondition::Neumann: return "neumann";
  }
  return "unknown";
}

BoundaryCondition parse_boundary_condition(const std::string& text) {
  if (text == "adjacency") return BoundaryCondition::Adjacency;
  if (text == "dirichlet") return BoundaryCondition::Dirichlet;
  if (text == "neumann") return BoundaryCondition::Neumann;
  throw DomainError("unknown boundary condition '" + text + "'");
}

std::string OperatorTag::label() const {
  switch (kind) {
    case OperatorKind::Free: return "free";
    case OperatorKind::Percolation: return "perc_" + to_string(bc);
    case OperatorKind::BoundaryPotential: return "boundary_potential";
    case OperatorKind::Extended: return "extended_" + to_string(bc) + "_K" + format_double(parameter);
    case OperatorKind::Anderson: return "anderson_lambda" + format_double(parameter);
    case OperatorKind::Restricted: return "restricted_" + to_string(bc);
    case OperatorKind::Subgraph: return "subgraph_" + to_string(bc);
  }
  return "unknown";
}

LabeledOperator free_laplacian(const CayleyPatch& window) {
  return graph_laplacian(window.adjacency(), all_vertices(window.size()), window.degree(),
                         BoundaryCondition::Adjacency, {OperatorKind::Free});
}

LabeledOperator subgraph_laplacian(const CayleyPatch& subgraph, BoundaryCondition bc) {
  return graph_laplacian(subgraph.adjacency(), all_vertices(subgraph.size()), subgraph.degree(), bc,
                         {OperatorKind::Subgraph, bc});
}

LabeledOperator percolation_laplacian(const PercolationSample& sample, BoundaryCondition bc) {
  return graph_laplacian(sample.open_graph(), sample.active_vertices(), sample.window().degree(), bc,
                         {OperatorKind::Percolation, bc});
}

LabeledOperator compressed_laplacian(const PercolationSample& sample, BoundaryCondition bc,
                                     std::span<const Index> subset) {
  std::vector<Index> active;
  for (Index v : subset) {
    if (v < 0 || v >= sample.window().size()) throw DomainError("subset vertex outside the sample window");
    if (sample.is_active(v)) active.push_back(v);
  }
  auto op = restrict(percolation_laplacian(sample, bc), active);
  op.tag = {OperatorKind::Restricted, bc};
  return op;
}

std::pair<LabeledOperator, LabeledOperator> decoupled_laplacians(const PercolationSample& sample,
                                                                 BoundaryCondition bc,
                                                                 std::span<const Index> subset) {
  auto lower = compressed_laplacian(sample, bc, subset);
  auto upper = lower;
  std::vector<unsigned char> inside(static_cast<std::size_t>(sample.window().size()), 0);
  for (Index v : subset) inside[v] = 1;
  for (Index r = 0; r < lower.dim(); ++r) {
    Index cut = 0;
    for (Index w : sample.open_graph().neighbors(lower.index_set[r])) cut += !inside[w];
    lower.matrix.coeffRef(r, r) -= static_cast<double>(cut);
    upper.matrix.coeffRef(r, r) += static_cast<double>(cut);
  }
  return {std::move(lower), std::move(upper)};
}

LabeledOperator boundary_potential(const PercolationSample& sample) {
  const auto active = sample.active_vertices();
  const int k = sample.window().degree();
  std::vector<Triplet> triplets;
  for (Index r = 0; r < static_cast<Index>(active.size()); ++r) {
    const double w = static_cast<double>(k - sample.open_graph().degree(active[r]));
    if (w != 0.0) triplets.emplace_back(r, r, w);
  }
  return from_triplets(active, triplets, {OperatorKind::BoundaryPotential}, k);
}

bool extension_is_separated(double K, int degree) noexcept { return K < 0.0 || K > 2.0 * degree; }

LabeledOperator extend(const LabeledOperator& op, const CayleyPatch& window, double K) {
  const Index n = window.size();
  std::vector<unsigned char> covered(static_cast<std::size_t>(n), 0);
  for (Index v : op.index_set) {
    if (v < 0 || v >= n) throw DomainError("operator vertex outside the extension window");
    covered[v] = 1;
  }
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(op.matrix.nonZeros() + n));
  for (Eigen::Index c = 0; c < op.matrix.outerSize(); ++c) {
    for (LabeledOperator::Matrix::InnerIterator it(op.matrix, c); it; ++it) {
      triplets.emplace_back(op.index_set[it.row()], op.index_set[it.col()], it.value());
    }
  }
  for (Index v = 0; v < n; ++v) {
    if (!covered[v]) triplets.emplace_back(v, v, K);
  }
  return from_triplets(all_vertices(n), triplets, {OperatorKind::Extended, op.tag.bc, K}, op.degree);
}

LabeledOperator anderson(const PercolationSample& sample, double lambda) {
  if (sample.model().kind != PercolationKind::Site) {
    throw DomainError("Bernoulli-Anderson coupling is defined for site percolation only");
  }
  if (!(lambda >= 0.0)) throw DomainError("Anderson coupling must be >= 0");
  auto op = free_laplacian(sample.window());
  for (Index v = 0; v < op.dim(); ++v) {
    if (!sample.is_active(v)) op.matrix.coeffRef(v, v) += lambda;
  }
  op.tag = {OperatorKind::Anderson, BoundaryCondition::Adjacency, lambda};
  return op;
}

LabeledOperator restrict(const LabeledOperator& op, std::span<const Index> subset) {
  std::unordered_map<Index, Index> row_of;
  row_of.reserve(static_cast<std::size_t>(op.dim()));
  for (Index r = 0; r < op.dim(); ++r) row_of.emplace(op.index_set[r], r);
  std::vector<Index> source(subset.size());
  std::vector<Index> target(static_cast<std::size_t>(op.dim()), -1);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    auto it = row_of.find(subset[i]);
    if (it == row_of.end()) {
      throw DomainError("restrict: vertex " + std::to_string(subset[i]) + " is not in the operator's index set");
    }
    if (target[it->second] >= 0) throw DomainError("restrict: duplicate vertex in subset");
    source[i] = it->second;
    target[it->second] = static_cast<Index>(i);
  }
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (LabeledOperator::Matrix::InnerIterator it(op.matrix, source[i]); it; ++it) {
      if (const Index r = target[it.row()]; r >= 0) triplets.emplace_back(r, static_cast<Index>(i), it.value());
    }
  }
  return from_triplets(std::vector<Index>(subset.begin(), subset.end()), triplets,
                       {OperatorKind::Restricted, op.tag.bc, op.tag.parameter}, op.degree);
}

LabeledOperator bipartite_conjugate(const LabeledOperator& op, std::span<const int> colour) {
  LabeledOperator out = op;
  for (Eigen::Index c = 0; c < out.matrix.outerSize(); ++c) {
    for (LabeledOperator::Matrix::InnerIterator it(out.matrix, c); it; ++it) {
      const Index u = op.index_set[it.row()];
      const Index v = op.index_set[it.col()];
      if (u >= static_cast<Index>(colour.size()) || v >= static_cast<Index>(colour.size())) {
        throw DomainError("colouring does not cover the operator's vertices");
      }
      const int cu = colour[u], cv = colour[v];
      if ((cu != 1 && cu != -1) || (cv != 1 && cv != -1)) throw DomainError("colours must be +1 or -1");
      if (it.row() != it.col() && it.value() != 0.0 && cu == cv) {
        throw DomainError("invalid colouring: coupled vertices " + std::to_string(u) + " and " + std::to_string(v) +
                          " share a colour");
      }
      it.valueRef() *= cu * cv;
    }
  }
  return out;
}

void write_matrix(std::ostream& out, const LabeledOperator& op) {
  out << "# n=" << op.dim() << " sym=1 tag=" << op.tag.label() << '\n';
  // By symmetry column i lists row i of the matrix; emit its upper part.
  for (Eigen::Index i = 0; i < op.matrix.outerSize(); ++i) {
    for (LabeledOperator::Matrix::InnerIterator it(op.matrix, i); it; ++it) {
      if (it.row() >= i) out << i << ' ' << it.row() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

}  // namespace percospec
