#include "percospec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "percospec/format.hpp"
#include "percospec/parallel.hpp"
#include "percospec/rng.hpp"

namespace percospec {

namespace {

using SparseMatrix = LabeledOperator::Matrix;

Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw DegenerateError("dense eigensolver did not converge");
  return solver.eigenvalues();
}

void check_dense_cap(const LabeledOperator& op, Index cap) {
  if (op.dim() > cap)
    throw ResourceError("dense eigensolve of dimension " + std::to_string(op.dim()) + " exceeds the cap of " +
                        std::to_string(cap));
}

Index count_sorted(const Eigen::VectorXd& sorted, double E) {
  const double* begin = sorted.data();
  return std::upper_bound(begin, begin + sorted.size(), E + kCountTolerance) - begin;
}

SparseMatrix principal_submatrix(const SparseMatrix& m, std::span<const Index> rows) {
  std::vector<Index> local(static_cast<std::size_t>(m.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) local[rows[i]] = static_cast<Index>(i);
  std::vector<Eigen::Triplet<double, Eigen::Index>> triplets;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (SparseMatrix::InnerIterator it(m, rows[i]); it; ++it) {
      const Index r = local[it.row()];
      if (r >= 0) triplets.emplace_back(r, static_cast<Index>(i), it.value());
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  SparseMatrix sub(n, n);
  sub.setFromTriplets(triplets.begin(), triplets.end());
  return sub;
}

}  // namespace

double operator_scale(const LabeledOperator& op) {
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(op.dim());
  for (Eigen::Index c = 0; c < op.matrix.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(op.matrix, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
  return op.dim() == 0 ? 0.0 : row_sums.maxCoeff();
}

double kernel_threshold(const LabeledOperator& op) { return kKernelTolerance * std::max(operator_scale(op), 1.0); }

Spectrum eigenvalues_dense(const LabeledOperator& op, Index dense_cap) {
  check_dense_cap(op, dense_cap);
  Spectrum s;
  s.eigenvalues = dense_eigenvalues(op.dense());
  s.scale = operator_scale(op);
  const double tol = kKernelTolerance * std::max(s.scale, 1.0);
  s.kernel_dim = (s.eigenvalues.array().abs() <= tol).count();
  return s;
}

EigenPairs eigenpairs_dense(const LabeledOperator& op, Index dense_cap) {
  check_dense_cap(op, dense_cap);
  EigenPairs out;
  if (op.dim() == 0) return out;
  const Eigen::MatrixXd h = op.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw DegenerateError("dense eigensolver did not converge");
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  const Eigen::MatrixXd residual = h * out.vectors - out.vectors * out.values.asDiagonal();
  out.max_residual = residual.colwise().norm().maxCoeff();
  if (out.max_residual > kKernelTolerance * std::max(operator_scale(op), 1.0))
    throw OracleViolation("eigenpair residual " + format_double(out.max_residual) + " above tolerance");
  return out;
}

Index count_below_ldlt(const SparseMatrix& m, double E) {
  if (m.rows() == 0) return 0;
  for (double shift : {E + kCountTolerance, E + 2 * kCountTolerance}) {
    const Index n = negative_inertia(m, shift);
    if (n >= 0) return n;
  }
  // Unpivoted LDL^T can hit an exact zero pivot when E is an eigenvalue of an
  // integer matrix; small blocks still have a reliable dense answer.
  if (m.rows() <= kDefaultDenseCap) return count_sorted(dense_eigenvalues(Eigen::MatrixXd(m)), E);
  throw DegenerateError("LDL^T breakdown at E = " + format_double(E));
}

Index count_below_dense(const LabeledOperator& op, double E) {
  return count_sorted(dense_eigenvalues(op.dense()), E);
}

Components operator_blocks(const LabeledOperator& op) {
  std::vector<Edge> edges;
  for (Eigen::Index c = 0; c < op.matrix.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(op.matrix, c); it; ++it)
      if (it.row() < c && it.value() != 0.0) edges.emplace_back(it.row(), c);
  std::sort(edges.begin(), edges.end());
  return connected_components(Adjacency::from_edges(op.dim(), edges));
}

std::vector<Index> count_below(const LabeledOperator& op, std::span<const double> energies, Index dense_block) {
  std::vector<Index> counts(energies.size(), 0);
  if (op.dim() == 0) return counts;
  const Components blocks = operator_blocks(op);
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(blocks.count()));
  for (Index v = 0; v < op.dim(); ++v) members[blocks.label[v]].push_back(v);

  for (const auto& rows : members) {
    if (rows.size() == 1) {
      const double d = op.matrix.coeff(rows[0], rows[0]);
      for (std::size_t j = 0; j < energies.size(); ++j) counts[j] += d <= energies[j] + kCountTolerance;
      continue;
    }
    const SparseMatrix sub = principal_submatrix(op.matrix, rows);
    if (static_cast<Index>(rows.size()) <= dense_block) {
      const Eigen::VectorXd values = dense_eigenvalues(Eigen::MatrixXd(sub));
      for (std::size_t j = 0; j < energies.size(); ++j) counts[j] += count_sorted(values, energies[j]);
    } else {
      for (std::size_t j = 0; j < energies.size(); ++j) counts[j] += count_below_ldlt(sub, energies[j]);
    }
  }
  return counts;
}

Index count_below(const LabeledOperator& op, double E, Index dense_block) {
  return count_below(op, std::span<const double>(&E, 1), dense_block).front();
}

double lowest_nonzero(const LabeledOperator& op, Index dense_cap) {
  if (op.dim() == 0) throw DomainError("lowest_nonzero of an empty operator");
  const Spectrum s = eigenvalues_dense(op, dense_cap);
  if (s.kernel_dim == s.dim()) throw DegenerateError("operator has no eigenvalue above the kernel threshold");
  return s.eigenvalues[s.kernel_dim];
}

CountingFunction::CountingFunction(std::span<const double> eigenvalues, double normalization)
    : normalization_(normalization) {
  if (!(normalization > 0)) throw DomainError("counting function normalization must be positive");
  std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
  std::sort(sorted.begin(), sorted.end());
  Index seen = 0;
  for (double v : sorted) {
    ++seen;
    if (!jumps_.empty() && v - jumps_.back() <= kCountTolerance) {
      cumulative_.back() = seen;
    } else {
      jumps_.push_back(v);
      cumulative_.push_back(seen);
    }
  }
}

double CountingFunction::operator()(double E) const {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), E + kCountTolerance);
  if (it == jumps_.begin()) return 0.0;
  return static_cast<double>(cumulative_[it - jumps_.begin() - 1]) / normalization_;
}

CountingFunction counting_function(const LabeledOperator& op, double normalization) {
  const Spectrum s = eigenvalues_dense(op);
  return CountingFunction(std::span<const double>(s.eigenvalues.data(), s.eigenvalues.size()), normalization);
}

double SpectralMeasure::cumulative(double E) const {
  double total = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] <= E + kCountTolerance) total += weights[i];
  return total;
}

SpectralMeasure local_spectral_measure(const LabeledOperator& op, Index row) {
  const Index n = op.dim();
  if (row < 0 || row >= n) throw DomainError("local_spectral_measure: row out of range");
  const double stop = 1e-10 * std::max(operator_scale(op), 1.0);

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[row] = 1.0;
  while (true) {
    basis.push_back(v);
    Eigen::VectorXd w = op.matrix * v;
    alpha.push_back(v.dot(w));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) w -= q.dot(w) * q;
    const double b = w.norm();
    if (b <= stop || static_cast<Index>(basis.size()) == n) break;
    beta.push_back(b);
    v = w / b;
  }

  const auto m = static_cast<Eigen::Index>(alpha.size());
  SpectralMeasure out;
  if (m == 1) {
    out.nodes = {alpha[0]};
    out.weights = {1.0};
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(Eigen::Map<Eigen::VectorXd>(alpha.data(), m),
                                Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1));
  if (solver.info() != Eigen::Success) throw DegenerateError("tridiagonal eigensolver did not converge");
  for (Eigen::Index j = 0; j < m; ++j) {
    out.nodes.push_back(solver.eigenvalues()[j]);
    const double c = solver.eigenvectors()(0, j);
    out.weights.push_back(c * c);
  }
  return out;
}

// --- integrated density of states -------------------------------------------

IDSEstimate empirical_ids(const PercolationModel& model, BoundaryCondition bc,
                          std::shared_ptr<const CayleyPatch> host, std::span<const Index> window,
                          const IdsOptions& options) {
  model.validate();
  if (options.n_samples < 10) throw DomainError("empirical_ids needs at least 10 samples");
  if (window.empty()) throw DomainError("empirical_ids: empty window");
  if (options.energies.empty()) throw DomainError("empirical_ids: empty energy grid");

  const auto samples = options.n_samples;
  const std::size_t ne = options.energies.size();
  const double volume = static_cast<double>(window.size());
  std::vector<std::vector<double>> values(samples), lows(samples), highs(samples);
  std::vector<double> zero(samples);

  parallel_for(samples, options.workers, [&](Index i) {
    const PercolationSample s = PercolationSample::draw(model, host, i);
    auto normalized = [&](const std::vector<Index>& c) {
      std::vector<double> out(c.size());
      for (std::size_t j = 0; j < c.size(); ++j) out[j] = static_cast<double>(c[j]) / volume;
      return out;
    };
    values[i] = normalized(count_below(compressed_laplacian(s, bc, window), options.energies));
    auto [lower, upper] = decoupled_laplacians(s, bc, window);
    if (options.bracket) {
      // Form order: lower <= H <= upper, so counts reverse.
      lows[i] = normalized(count_below(upper, options.energies));
      highs[i] = normalized(count_below(lower, options.energies));
    }
    const LabeledOperator intrinsic =
        bc == BoundaryCondition::Neumann ? std::move(lower) : decoupled_laplacians(s, BoundaryCondition::Neumann, window).first;
    zero[i] = static_cast<double>(count_below(intrinsic, kernel_threshold(intrinsic))) / volume;
  });

  IDSEstimate out;
  out.energies = options.energies;
  out.model = model;
  out.bc = bc;
  out.window_size = static_cast<Index>(window.size());
  out.n_samples = samples;
  out.mean.assign(ne, 0.0);
  out.std_error.assign(ne, 0.0);
  // Two-pass moments, summed in sample order so every column reduces identically.
  const double n = static_cast<double>(samples);
  auto moments = [&](auto&& at) {
    double sum = 0;
    for (Index i = 0; i < samples; ++i) sum += at(i);
    const double mean = sum / n;
    double squares = 0;
    for (Index i = 0; i < samples; ++i) squares += (at(i) - mean) * (at(i) - mean);
    return std::pair{mean, std::sqrt(squares / (n - 1) / n)};
  };
  for (std::size_t j = 0; j < ne; ++j) {
    std::tie(out.mean[j], out.std_error[j]) = moments([&](Index i) { return values[i][j]; });
  }
  if (options.bracket) {
    out.bracket_dirichlet.assign(ne, 0.0);
    out.bracket_neumann.assign(ne, 0.0);
    for (std::size_t j = 0; j < ne; ++j) {
      out.bracket_dirichlet[j] = moments([&](Index i) { return lows[i][j]; }).first;
      out.bracket_neumann[j] = moments([&](Index i) { return highs[i][j]; }).first;
    }
  }
  std::tie(out.n_at_zero, out.n_at_zero_stderr) = moments([&](Index i) { return zero[i]; });
  return out;
}

IDSEstimate empirical_ids(const GroupSpec& spec, const PercolationModel& model, BoundaryCondition bc, int radius,
                          const IdsOptions& options) {
  if (radius < 1) throw DomainError("empirical_ids: radius must be at least 1");
  auto host = std::make_shared<const CayleyBall>(enumerate_ball(spec, radius + 1));
  std::vector<Index> window(static_cast<std::size_t>(host->volumes()[radius]));
  for (std::size_t v = 0; v < window.size(); ++v) window[v] = static_cast<Index>(v);
  IDSEstimate out = empirical_ids(model, bc, host, window, options);
  out.radius = radius;
  return out;
}

void write_ids_csv(std::ostream& out, const IDSEstimate& ids) {
  out << "E,mean,stderr,n_samples,bc,model,p,radius,seed\n";
  for (std::size_t j = 0; j < ids.energies.size(); ++j) {
    out << format_double(ids.energies[j]) << ',' << format_double(ids.mean[j]) << ','
        << format_double(ids.std_error[j]) << ',' << ids.n_samples << ',' << to_string(ids.bc) << ','
        << to_string(ids.model.kind) << ',' << format_double(ids.model.p) << ',' << ids.radius << ','
        << ids.model.seed << '\n';
  }
}

Eigen::VectorXd z1_path_eigenvalues(BoundaryCondition bc, Index s) {
  if (s < 1) throw DomainError("path length must be positive");
  Eigen::VectorXd diag(s);
  for (Index i = 0; i < s; ++i) {
    const int d = (i > 0) + (i + 1 < s);
    switch (bc) {
      case BoundaryCondition::Adjacency: diag[i] = 2; break;
      case BoundaryCondition::Dirichlet: diag[i] = 4 - d; break;
      case BoundaryCondition::Neumann: diag[i] = d; break;
    }
  }
  if (s == 1) return diag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, Eigen::VectorXd::Constant(s - 1, -1.0), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

std::vector<double> z1_site_exact_ids(BoundaryCondition bc, double p, std::span<const double> energies,
                                      Index s_max) {
  if (!(p >= 0 && p <= 1)) throw DomainError("p must lie in [0, 1]");
  std::vector<double> out(energies.size(), 0.0);
  if (p == 0) return out;
  if (p == 1) {
    // The whole line: N = N_0 for every boundary condition.
    for (std::size_t j = 0; j < energies.size(); ++j) out[j] = free_ids_zd(1, energies[j]).value;
    return out;
  }
  const double q2 = (1 - p) * (1 - p);
  for (Index s = 1; s <= s_max; ++s) {
    const double weight = std::pow(p, static_cast<double>(s)) * q2;
    if (weight < 1e-300) break;
    const Eigen::VectorXd values = z1_path_eigenvalues(bc, s);
    for (std::size_t j = 0; j < energies.size(); ++j)
      out[j] += weight * static_cast<double>(count_sorted(values, energies[j]));
  }
  return out;
}

// --- free Laplacian -----------------------------------------------------------

namespace {

/// Measure of {theta in [0, pi] : 2(1 - cos theta) <= e}.
double arc(double e) { return std::acos(std::clamp(1.0 - e / 2.0, -1.0, 1.0)); }

}  // namespace

FreeIdsValue free_ids_zd(int d, double E, Index mc_samples, std::uint64_t seed) {
  if (d < 1 || d > 4) throw DomainError("free_ids_zd supports d = 1..4");
  FreeIdsValue out;
  constexpr double pi = std::numbers::pi;
  if (E < 0) {
    out.clamped = true;
    out.method = "clamped";
    return out;
  }
  if (E >= 4.0 * d) {
    out.value = 1.0;
    out.clamped = E > 4.0 * d;
    out.method = out.clamped ? "clamped" : "closed_form";
    return out;
  }
  if (d == 1) {
    out.value = arc(E) / pi;
    out.method = "closed_form";
    return out;
  }
  if (d == 2) {
    // Integrand is pi below theta_hi, 0 above theta_lo, smooth between.
    const double theta_lo = arc(E);
    const double theta_hi = E > 4.0 ? arc(E - 4.0) : 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0;
    double integral = pi * theta_hi;
    if (theta_lo > theta_hi) {
      auto f = [E](double theta) { return arc(E - 2.0 * (1.0 - std::cos(theta))); };
      integral += integrator.integrate(f, theta_hi, theta_lo, 1e-12, &error);
    }
    out.value = integral / (pi * pi);
    out.error = error / (pi * pi);
    out.method = "quadrature";
    return out;
  }
  if (mc_samples < 2) throw DomainError("free_ids_zd: need at least 2 Monte Carlo samples");
  // Average the exact conditional law of the last coordinate.
  CounterRng rng(seed, static_cast<std::uint64_t>(d));
  double sum = 0, sum2 = 0;
  for (Index i = 0; i < mc_samples; ++i) {
    double used = 0;
    for (int c = 0; c + 1 < d; ++c) used += 2.0 * (1.0 - std::cos(pi * rng.uniform()));
    const double v = arc(E - used) / pi;
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(mc_samples);
  out.value = sum / n;
  out.error = std::sqrt(std::max(0.0, sum2 / n - out.value * out.value) / (n - 1));
  out.method = "monte_carlo";
  return out;
}

FreeIdsTrace free_ids_ball(const GroupSpec& spec, int radius, std::span<const double> energies,
                           std::vector<int> radii, Index budget) {
  if (radius < 1) throw DomainError("free_ids_ball: radius must be at least 1");
  if (radii.empty()) radii = {std::max(1, radius / 4), std::max(1, radius / 2), radius};
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  if (radii.front() < 1 || radii.back() > radius) throw DomainError("free_ids_ball: radii must lie in [1, radius]");

  const CayleyBall ball = enumerate_ball(spec, radius, budget);
  FreeIdsTrace out;
  out.energies.assign(energies.begin(), energies.end());
  out.radii = radii;
  for (int r : radii) {
    const FiniteSubgraph patch = ball_subgraph(ball, r);
    const SpectralMeasure mu = local_spectral_measure(free_laplacian(patch), *patch.find(spec.identity()));
    std::vector<double> row;
    row.reserve(energies.size());
    for (double E : energies) row.push_back(mu.cumulative(E));
    out.values.push_back(std::move(row));
  }
  return out;
}

ReturnProbability return_probability(const GroupSpec& spec, int half_steps, Index budget) {
  if (half_steps < 0) throw DomainError("return_probability: negative step count");
  // After j <= n steps the walk lies in B(j), so B(n) holds every length-n path.
  const CayleyBall ball = enumerate_ball(spec, half_steps, budget);
  const Adjacency& adj = ball.adjacency();
  const double k = spec.degree();
  std::vector<long double> q(static_cast<std::size_t>(ball.size()), 0.0L), next(q.size());
  q[0] = 1.0L;
  for (int step = 0; step < half_steps; ++step) {
    std::fill(next.begin(), next.end(), 0.0L);
    for (Index v = 0; v < ball.size(); ++v) {
      if (q[v] == 0.0L) continue;
      const long double share = q[v] / k;
      for (Index w : adj.neighbors(v)) next[w] += share;
    }
    std::swap(q, next);
  }
  long double total = 0;
  for (long double x : q) total += x * x;
  return {2 * static_cast<Index>(half_steps), static_cast<double>(total)};
}

}  // namespace percospec
