#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "percospec/cayley.hpp"
#include "percospec/errors.hpp"
#include "percospec/graph.hpp"
#include "percospec/operators.hpp"
#include "percospec/percolation.hpp"

namespace percospec {

/// Eigenvalues with |lambda| <= kKernelTolerance * max(scale, 1) count as kernel,
/// where scale is the max-row-sum norm of the operator.
inline constexpr double kKernelTolerance = 1e-8;
/// count_below(E) counts eigenvalues lambda <= E + kCountTolerance.
inline constexpr double kCountTolerance = 1e-9;
inline constexpr Index kDefaultDenseCap = 4000;
/// Blocks above this size are counted by LDL^T inertia instead of a dense solve.
inline constexpr Index kDefaultDenseBlock = 512;

struct Spectrum {
  Eigen::VectorXd eigenvalues;  ///< ascending
  Index kernel_dim = 0;
  double scale = 0;

  Index dim() const noexcept { return eigenvalues.size(); }
};

double operator_scale(const LabeledOperator& op);
double kernel_threshold(const LabeledOperator& op);

Spectrum eigenvalues_dense(const LabeledOperator& op, Index dense_cap = kDefaultDenseCap);

struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  ///< column j belongs to values[j]
  double max_residual = 0;  ///< max_j ||H v_j - lambda_j v_j||
};

EigenPairs eigenpairs_dense(const LabeledOperator& op, Index dense_cap = kDefaultDenseCap);

/// Number of negative pivots of an LDL^T factorization of (m - shift I),
/// which by Sylvester's law equals #{lambda < shift}. Returns -1 on a zero pivot.
template <typename Scalar>
Index negative_inertia(const Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Eigen::Index>& m, Scalar shift) {
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Eigen::Index>;
  Matrix identity(m.rows(), m.cols());
  identity.setIdentity();
  const Matrix shifted = m - shift * identity;
  Eigen::SimplicialLDLT<Matrix, Eigen::Lower> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) return -1;
  const auto d = ldlt.vectorD();
  Index negative = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] != Scalar(0))) return -1;
    negative += d[i] < Scalar(0);
  }
  return negative;
}

/// #{lambda <= E + tol} by inertia; retries once at E + 2 tol, then throws.
Index count_below_ldlt(const LabeledOperator::Matrix& m, double E);
/// Same count from a dense symmetric eigensolve.
Index count_below_dense(const LabeledOperator& op, double E);

/// Rows coupled through nonzero off-diagonal entries.
Components operator_blocks(const LabeledOperator& op);

/// #{lambda <= E + tol}, block by block: dense solve for small blocks, inertia for large ones.
Index count_below(const LabeledOperator& op, double E, Index dense_block = kDefaultDenseBlock);
std::vector<Index> count_below(const LabeledOperator& op, std::span<const double> energies,
                               Index dense_block = kDefaultDenseBlock);

/// Smallest eigenvalue above the kernel threshold.
double lowest_nonzero(const LabeledOperator& op, Index dense_cap = kDefaultDenseCap);

/// Right-continuous normalized eigenvalue counting function.
class CountingFunction {
 public:
  CountingFunction(std::span<const double> eigenvalues, double normalization);

  /// #{lambda <= E + tol} / normalization
  double operator()(double E) const;
  const std::vector<double>& jump_locations() const noexcept { return jumps_; }
  const std::vector<Index>& cumulative() const noexcept { return cumulative_; }
  double normalization() const noexcept { return normalization_; }

 private:
  std::vector<double> jumps_;
  std::vector<Index> cumulative_;
  double normalization_;
};

CountingFunction counting_function(const LabeledOperator& op, double normalization);

/// Spectral measure of op at one row: nodes and weights with
/// <chi_(-inf,E](op) e_row, e_row> = sum of weights at nodes <= E + tol.
struct SpectralMeasure {
  std::vector<double> nodes;
  std::vector<double> weights;

  double cumulative(double E) const;
};

/// Lanczos with full reorthogonalization run until the Krylov space of e_row is
/// exhausted, so the Gauss quadrature is the exact measure.
SpectralMeasure local_spectral_measure(const LabeledOperator& op, Index row);

// --- integrated density of states -------------------------------------------

struct IdsOptions {
  Index n_samples = 100;
  std::vector<double> energies;
  int workers = 1;
  bool bracket = true;
};

struct IDSEstimate {
  std::vector<double> energies;
  std::vector<double> mean;
  std::vector<double> std_error;
  /// Counts with the open edges leaving the window doubled (Dirichlet side, lower)
  /// and dropped (Neumann side, upper).
  std::vector<double> bracket_dirichlet;
  std::vector<double> bracket_neumann;
  double n_at_zero = 0;  ///< kernel mass of the intrinsic window Neumann operator
  double n_at_zero_stderr = 0;

  PercolationModel model;
  BoundaryCondition bc = BoundaryCondition::Adjacency;
  int radius = -1;
  Index window_size = 0;
  Index n_samples = 0;
};

/// Mean over samples of (1/|window|) #{lambda <= E} for the compression of the
/// percolation Laplacian on `host` to the window vertices.
IDSEstimate empirical_ids(const PercolationModel& model, BoundaryCondition bc,
                          std::shared_ptr<const CayleyPatch> host, std::span<const Index> window,
                          const IdsOptions& options);

/// Ball window B(radius), sampled on B(radius + 1) so the compression is exact.
IDSEstimate empirical_ids(const GroupSpec& spec, const PercolationModel& model, BoundaryCondition bc, int radius,
                          const IdsOptions& options);

/// CSV columns E,mean,stderr,n_samples,bc,model,p,radius,seed.
void write_ids_csv(std::ostream& out, const IDSEstimate& ids);

/// Site percolation on Z is exactly solvable: clusters are paths L_s with
/// density p^s (1-p)^2 per vertex. Returns N^bc(E) summed over s <= s_max.
std::vector<double> z1_site_exact_ids(BoundaryCondition bc, double p, std::span<const double> energies,
                                      Index s_max = 400);
/// Eigenvalues of the bc-Laplacian of the path L_s inside Z.
Eigen::VectorXd z1_path_eigenvalues(BoundaryCondition bc, Index s);

// --- free Laplacian -----------------------------------------------------------

struct FreeIdsValue {
  double value = 0;
  double error = 0;  ///< quadrature error estimate or Monte Carlo standard error
  bool clamped = false;
  std::string method;
};

/// N_0(E) on Z^d: (2 pi)^-d vol{theta : sum_i 2(1 - cos theta_i) <= E}.
/// Closed form for d = 1, quadrature for d = 2, conditional Monte Carlo for d = 3, 4.
FreeIdsValue free_ids_zd(int d, double E, Index mc_samples = 400000, std::uint64_t seed = 1);

/// <chi_(-inf,E](Delta^A(B(r))) delta_id, delta_id> for each r in `radii`.
struct FreeIdsTrace {
  std::vector<double> energies;
  std::vector<int> radii;
  std::vector<std::vector<double>> values;  ///< values[i][j]: radius radii[i], energy j

  const std::vector<double>& final_values() const { return values.back(); }
};

FreeIdsTrace free_ids_ball(const GroupSpec& spec, int radius, std::span<const double> energies,
                           std::vector<int> radii = {}, Index budget = default_vertex_budget());

struct ReturnProbability {
  Index steps = 0;  ///< 2n
  double value = 0;
};

/// <(A/k)^{2n} delta_id, delta_id>, from walk counts on B(n).
ReturnProbability return_probability(const GroupSpec& spec, int half_steps, Index budget = default_vertex_budget());

}  // namespace percospec
