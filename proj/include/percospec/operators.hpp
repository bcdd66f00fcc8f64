#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "percospec/cayley.hpp"
#include "percospec/percolation.hpp"
#include "percospec/types.hpp"

namespace percospec {

enum class BoundaryCondition { Adjacency, Dirichlet, Neumann };

std::string to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(const std::string& text);

enum class OperatorKind { Free, Percolation, BoundaryPotential, Extended, Anderson, Restricted, Subgraph };

/// Provenance of an operator. `parameter` is K for Extended and lambda for Anderson.
struct OperatorTag {
  OperatorKind kind = OperatorKind::Free;
  BoundaryCondition bc = BoundaryCondition::Adjacency;
  double parameter = 0;

  std::string label() const;
};

/// Symmetric sparse operator over an ordered vertex list of a window. Row r
/// acts on vertex index_set[r]. Both triangles are stored; column indices sorted.
template <typename Scalar>
struct BasicOperator {
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Eigen::Index>;
  using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  std::vector<Index> index_set;
  Matrix matrix;
  OperatorTag tag;
  int degree = 0;  ///< k of the parent Cayley graph

  Index dim() const noexcept { return matrix.rows(); }
  DenseMatrix dense() const { return DenseMatrix(matrix); }
  Scalar trace() const { return matrix.diagonal().sum(); }
};

using LabeledOperator = BasicOperator<double>;

/// k Id - A on the window's induced subgraph.
LabeledOperator free_laplacian(const CayleyPatch& window);

/// Adjacency (k Id - A), Dirichlet (2k Id - D - A) or Neumann (D - A)
/// Laplacian of a finite induced subgraph, over all of its vertices.
LabeledOperator subgraph_laplacian(const CayleyPatch& subgraph, BoundaryCondition bc);

/// Percolation Laplacian of G(omega) inside the window, over the active
/// vertices in window order; degrees count open adjacency within the window.
LabeledOperator percolation_laplacian(const PercolationSample& sample, BoundaryCondition bc);

/// P Delta P* of the window percolation Laplacian onto the active vertices of
/// `subset`. When every Cayley neighbour of the subset lies in the sample's
/// window, this is the exact compression of the infinite-volume operator.
LabeledOperator compressed_laplacian(const PercolationSample& sample, BoundaryCondition bc,
                                     std::span<const Index> subset);

/// Compression with the open edges leaving `subset` dropped (lower) or doubled
/// (upper) on the diagonal; in the form sense lower <= compression <= upper.
std::pair<LabeledOperator, LabeledOperator> decoupled_laplacians(const PercolationSample& sample,
                                                                 BoundaryCondition bc,
                                                                 std::span<const Index> subset);

/// W = k Id - D over the active vertices.
LabeledOperator boundary_potential(const PercolationSample& sample);

/// op on its vertices, K on every other vertex of the window, no coupling.
LabeledOperator extend(const LabeledOperator& op, const CayleyPatch& window, double K);
/// True when K lies outside [0, 2k].
bool extension_is_separated(double K, int degree) noexcept;

/// Free window Laplacian plus lambda on the closed sites. Site samples only.
LabeledOperator anderson(const PercolationSample& sample, double lambda);

/// Principal submatrix on the listed vertices (window ids), in the given order.
LabeledOperator restrict(const LabeledOperator& op, std::span<const Index> subset);

/// U op U with U = diag(colour), colour[v] in {+1, -1} per window vertex.
LabeledOperator bipartite_conjugate(const LabeledOperator& op, std::span<const int> colour);

/// Coordinate text: "# n=<dim> sym=1 tag=<tag>" then "i j value" with i <= j.
void write_matrix(std::ostream& out, const LabeledOperator& op);

}  // namespace percospec
