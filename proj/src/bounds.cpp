#include "percospec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

#include "percospec/format.hpp"
#include "percospec/spectra.hpp"

namespace percospec {

namespace {

constexpr double kMinMaxSlack = 1e-10;

double lowest_eigenvalue(const LabeledOperator& op) {
  if (op.tag.bc == BoundaryCondition::Neumann) return lowest_nonzero(op);
  return eigenvalues_dense(op).eigenvalues[0];
}

}  // namespace

TestFunction dirichlet_radial(const CayleyBall& ball, int n) {
  if (n < 1 || n > ball.radius()) throw DomainError("dirichlet_radial: need 1 <= n <= ball radius");
  const Index size = ball.volumes()[n];
  const int plateau = (n + 1) / 2;
  TestFunction phi{Eigen::VectorXd(size), TestFunctionKind::DirichletRadial};
  for (Index v = 0; v < size; ++v) phi.values[v] = std::min(n - ball.word_length(v), plateau);
  return phi;
}

TestFunction neumann_linear(Index n) {
  if (n < 1) throw DomainError("neumann_linear: n must be positive");
  TestFunction phi{Eigen::VectorXd(n), TestFunctionKind::NeumannLinear};
  for (Index i = 0; i < n; ++i) phi.values[i] = static_cast<double>(i) - static_cast<double>(n - 1) / 2.0;
  return phi;
}

double rayleigh(const LabeledOperator& op, const TestFunction& phi) {
  if (phi.values.size() != op.dim()) throw DomainError("rayleigh: test function has the wrong length");
  Eigen::VectorXd v = phi.values;
  if (op.tag.bc == BoundaryCondition::Neumann) {
    const Components blocks = operator_blocks(op);
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(blocks.count());
    for (Index i = 0; i < v.size(); ++i) sums[blocks.label[i]] += v[i];
    for (Index i = 0; i < v.size(); ++i)
      v[i] -= sums[blocks.label[i]] / static_cast<double>(blocks.size[blocks.label[i]]);
  }
  const double norm2 = v.squaredNorm();
  if (!(norm2 > 1e-24 * std::max(1.0, phi.values.squaredNorm())))
    throw DegenerateError("rayleigh: test function vanishes after kernel orthogonalization");
  return v.dot(op.matrix * v) / norm2;
}

std::vector<FamilyMember> ball_family(const GroupSpec& spec, int r_min, int r_max) {
  if (r_min < 0 || r_max < r_min) throw DomainError("ball_family: bad radius range");
  const CayleyBall ball = enumerate_ball(spec, r_max);
  std::vector<FamilyMember> out;
  for (int r = r_min; r <= r_max; ++r) out.push_back({r, ball_subgraph(ball, r)});
  return out;
}

std::vector<FamilyMember> line_family(const GroupSpec& spec, Index n_min, Index n_max) {
  if (n_min < 1 || n_max < n_min) throw DomainError("line_family: bad length range");
  std::vector<FamilyMember> out;
  for (Index n = n_min; n <= n_max; ++n) out.push_back({n, line_subgraph(spec, n)});
  return out;
}

BoundFit lower_bound_check_adjacency(const std::vector<FamilyMember>& family, const GrowthProfile& growth,
                                     const std::vector<FamilyMember>& held_out, std::string name) {
  if (family.empty()) throw DomainError("lower_bound_check_adjacency: empty family");
  auto measure = [&](const FamilyMember& m) {
    if (!m.subgraph.connected()) throw DomainError("lower_bound_check_adjacency: disconnected member");
    const double lambda = lowest_eigenvalue(subgraph_laplacian(m.subgraph, BoundaryCondition::Adjacency));
    const double phi = growth.phi(static_cast<double>(m.subgraph.size()));
    return std::pair{lambda, phi * phi};
  };
  BoundFit fit;
  fit.family = std::move(name);
  fit.constant_name = "alpha_D";
  fit.fit_min = family.front().n;
  fit.fit_max = family.back().n;
  fit.constant = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> values;
  for (const auto& m : family) {
    values.push_back(measure(m));
    fit.constant = std::min(fit.constant, values.back().first * values.back().second);
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double bound = fit.constant / values[i].second;
    fit.per_member.push_back({family[i].n, family[i].subgraph.size(), values[i].first, bound});
    fit.violations += values[i].first < bound - kMinMaxSlack;
  }
  for (const auto& m : held_out) {
    const auto [lambda, phi2] = measure(m);
    const double bound = fit.constant / phi2;
    fit.held_out.push_back({m.n, m.subgraph.size(), lambda, bound});
    fit.held_out_violations += lambda < bound - kMinMaxSlack;
  }
  return fit;
}

BoundFit lower_bound_check_neumann(const std::vector<FamilyMember>& family,
                                   const std::vector<FamilyMember>& held_out, std::string name) {
  if (family.empty()) throw DomainError("lower_bound_check_neumann: empty family");
  auto measure = [](const FamilyMember& m) {
    if (!m.subgraph.connected() || m.subgraph.size() < 2)
      throw DomainError("lower_bound_check_neumann: members must be connected with at least 2 vertices");
    const double size = static_cast<double>(m.subgraph.size());
    return std::pair{lowest_nonzero(subgraph_laplacian(m.subgraph, BoundaryCondition::Neumann)), size * size};
  };
  BoundFit fit;
  fit.family = std::move(name);
  fit.constant_name = "alpha_N";
  fit.fit_min = family.front().n;
  fit.fit_max = family.back().n;
  fit.constant = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> values;
  for (const auto& m : family) {
    values.push_back(measure(m));
    fit.constant = std::min(fit.constant, values.back().first * values.back().second);
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double bound = fit.constant / values[i].second;
    fit.per_member.push_back({family[i].n, family[i].subgraph.size(), values[i].first, bound});
    fit.violations += values[i].first < bound - kMinMaxSlack;
  }
  for (const auto& m : held_out) {
    const auto [lambda, size2] = measure(m);
    const double bound = fit.constant / size2;
    fit.held_out.push_back({m.n, m.subgraph.size(), lambda, bound});
    fit.held_out_violations += lambda < bound - kMinMaxSlack;
  }
  return fit;
}

BoundFit upper_bound_check_dirichlet(const GroupSpec& spec, int n_min, int n_max) {
  if (n_min < 1 || n_max < n_min) throw DomainError("upper_bound_check_dirichlet: bad radius range");
  const CayleyBall ball = enumerate_ball(spec, n_max);
  const auto& V = ball.volumes();
  BoundFit fit;
  fit.family = "balls " + spec.name();
  fit.constant_name = "gamma_D";
  fit.fit_min = n_min;
  fit.fit_max = n_max;
  std::vector<double> lambdas, shapes;
  for (int n = n_min; n <= n_max; ++n) {
    const LabeledOperator op = subgraph_laplacian(ball_subgraph(ball, n), BoundaryCondition::Dirichlet);
    const double lambda = lowest_eigenvalue(op);
    const double rq = rayleigh(op, dirichlet_radial(ball, n));
    if (rq < lambda - kMinMaxSlack)
      throw OracleViolation("Rayleigh quotient below lambda^D(B(" + std::to_string(n) + "))");
    const double shape = static_cast<double>(V[n]) / (static_cast<double>(n) * n * static_cast<double>(V[n / 2]));
    fit.constant = std::max(fit.constant, rq / shape);
    lambdas.push_back(lambda);
    shapes.push_back(shape);
  }
  for (int n = n_min; n <= n_max; ++n) {
    const auto i = static_cast<std::size_t>(n - n_min);
    const double bound = fit.constant * shapes[i];
    fit.per_member.push_back({n, V[n], lambdas[i], bound});
    fit.violations += lambdas[i] > bound + kMinMaxSlack;
  }
  return fit;
}

BoundFit upper_bound_check_neumann(const GroupSpec& spec, Index n_min, Index n_max) {
  if (n_min < 2 || n_max < n_min) throw DomainError("upper_bound_check_neumann: need 2 <= n_min <= n_max");
  BoundFit fit;
  fit.family = "lines " + spec.name();
  fit.constant_name = "gamma_N";
  fit.fit_min = n_min;
  fit.fit_max = n_max;
  std::vector<double> lambdas;
  for (Index n = n_min; n <= n_max; ++n) {
    const LabeledOperator op = subgraph_laplacian(line_subgraph(spec, n), BoundaryCondition::Neumann);
    const double lambda = lowest_nonzero(op);
    const double rq = rayleigh(op, neumann_linear(n));
    if (rq < lambda - kMinMaxSlack)
      throw OracleViolation("Rayleigh quotient below lambda^N(L_" + std::to_string(n) + ")");
    fit.constant = std::max(fit.constant, rq * static_cast<double>(n * n));
    lambdas.push_back(lambda);
  }
  for (Index n = n_min; n <= n_max; ++n) {
    const double lambda = lambdas[static_cast<std::size_t>(n - n_min)];
    const double bound = fit.constant / static_cast<double>(n * n);
    fit.per_member.push_back({n, n, lambda, bound});
    fit.violations += lambda > bound + kMinMaxSlack;
  }
  return fit;
}

TetrahedronReport tetrahedron_report(int modulus, int depth) {
  if (depth < 2) throw DomainError("tetrahedron checks need depth >= 2");
  const FiniteSubgraph tetra = tetrahedron(modulus, depth);
  TetrahedronReport r;
  r.modulus = modulus;
  r.depth = depth;
  r.vertices = tetra.size();
  r.expected_vertices = depth + 1;
  for (int i = 0; i < depth; ++i) r.expected_vertices *= modulus;
  r.target = 2.0 * modulus * (1.0 - std::cos(std::numbers::pi / depth));

  const EigenPairs pairs = eigenpairs_dense(subgraph_laplacian(tetra, BoundaryCondition::Adjacency));
  r.lowest_eigenvalue = pairs.values[0];
  r.eigen_distance = (pairs.values.array() - r.target).abs().minCoeff();

  std::vector<Eigen::Index> columns;
  for (Eigen::Index j = 0; j < pairs.values.size(); ++j)
    if (std::abs(pairs.values[j] - r.target) <= 1e-6) columns.push_back(j);
  r.multiplicity = static_cast<Index>(columns.size());
  const std::vector<Index> boundary = inner_vertex_boundary(tetra);
  r.boundary_size = static_cast<Index>(boundary.size());
  r.boundary_ratio = std::numeric_limits<double>::infinity();
  if (!columns.empty()) {
    const Eigen::MatrixXd space = pairs.vectors(Eigen::all, columns);
    // Combination of the eigenspace basis closest to vanishing on the boundary.
    Eigen::VectorXd coeffs = Eigen::VectorXd::Unit(space.cols(), 0);
    if (!boundary.empty()) {
      const Eigen::MatrixXd rows = space(boundary, Eigen::all);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
      coeffs = svd.matrixV().col(svd.matrixV().cols() - 1);
    }
    const Eigen::VectorXd v = space * coeffs;
    const double global = v.cwiseAbs().maxCoeff();
    double edge = 0;
    for (Index b : boundary) edge = std::max(edge, std::abs(v[b]));
    r.boundary_ratio = edge / global;
  }
  r.passed = r.vertices == r.expected_vertices && r.eigen_distance <= kTetrahedronTolerance &&
             r.boundary_ratio <= kTetrahedronTolerance;
  return r;
}

TetrahedronReport tetrahedron_checks(int modulus, int depth) {
  TetrahedronReport r = tetrahedron_report(modulus, depth);
  const std::string where = " for T_" + std::to_string(depth) + " in lamplighter(" + std::to_string(modulus) + ")";
  if (r.vertices != r.expected_vertices)
    throw OracleViolation("vertex count " + std::to_string(r.vertices) + " != " + std::to_string(r.expected_vertices) + where);
  if (r.eigen_distance > kTetrahedronTolerance)
    throw OracleViolation("target eigenvalue missing (distance " + format_double(r.eigen_distance) + ")" + where);
  if (r.boundary_ratio > kTetrahedronTolerance)
    throw OracleViolation("no eigenvector vanishing on the inner boundary (ratio " + format_double(r.boundary_ratio) +
                          ")" + where);
  return r;
}

Index SandwichInputs::position(double E) const {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] <= E) return static_cast<Index>(i);
  return -1;
}

Index SandwichInputs::n_of(double E) const {
  const Index i = position(E);
  return i < 0 ? -1 : n[static_cast<std::size_t>(i)];
}

Index SandwichInputs::size_of(double E) const {
  const Index i = position(E);
  return i < 0 ? -1 : sizes[static_cast<std::size_t>(i)];
}

SandwichInputs sandwich_inputs(const std::vector<FamilyMember>& family, std::vector<double> c,
                               BoundaryCondition bc) {
  if (family.size() != c.size()) throw DomainError("sandwich_inputs: one c_n per family member required");
  SandwichInputs out;
  out.bc = bc;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const LabeledOperator op = subgraph_laplacian(family[i].subgraph, bc);
    const double lambda = lowest_eigenvalue(op);
    if (lambda > c[i] + kMinMaxSlack)
      throw OracleViolation("lambda(G'_" + std::to_string(family[i].n) + ") = " + format_double(lambda) +
                            " exceeds c_n = " + format_double(c[i]));
    out.n.push_back(family[i].n);
    out.sizes.push_back(family[i].subgraph.size());
    out.lambda.push_back(lambda);
  }
  out.c = std::move(c);
  return out;
}

}  // namespace percospec
