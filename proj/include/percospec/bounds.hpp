#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "percospec/cayley.hpp"
#include "percospec/operators.hpp"

namespace percospec {

enum class TestFunctionKind { DirichletRadial, NeumannLinear, Custom };

/// Values over the vertices of a subgraph, in the subgraph's vertex order.
struct TestFunction {
  Eigen::VectorXd values;
  TestFunctionKind kind = TestFunctionKind::Custom;
};

/// On B(n): min(n - |x|, ceil(n/2)), so 0 on the sphere of radius n.
/// `ball` must have radius >= n; values are given over B(n) in ball order.
TestFunction dirichlet_radial(const CayleyBall& ball, int n);
/// On the path L_n: (-(n-1)/2, ..., (n-1)/2) in path order.
TestFunction neumann_linear(Index n);

/// <phi, H phi> / <phi, phi>. For Neumann operators phi is first made orthogonal
/// to the constants on each block of H.
double rayleigh(const LabeledOperator& op, const TestFunction& phi);

struct BoundMember {
  Index n = 0;      ///< family index (radius, length or depth)
  Index size = 0;   ///< |G'|
  double lambda = 0;
  double bound = 0;
};

/// A fitted constant for one inequality over a family of subgraphs.
struct BoundFit {
  std::string family;
  std::string constant_name;
  double constant = 0;
  Index fit_min = 0;
  Index fit_max = 0;
  Index violations = 0;
  Index held_out_violations = 0;
  std::vector<BoundMember> per_member;
  std::vector<BoundMember> held_out;
};

/// Family member together with its label n.
struct FamilyMember {
  Index n = 0;
  FiniteSubgraph subgraph;
};

std::vector<FamilyMember> ball_family(const GroupSpec& spec, int r_min, int r_max);
std::vector<FamilyMember> line_family(const GroupSpec& spec, Index n_min, Index n_max);

/// Largest alpha with lambda^A(G') phi(|G'|)^2 >= alpha on the family (beta = 1).
BoundFit lower_bound_check_adjacency(const std::vector<FamilyMember>& family, const GrowthProfile& growth,
                                     const std::vector<FamilyMember>& held_out = {}, std::string name = "family");
/// Largest alpha with lambda^N(G') |G'|^2 >= alpha on the family.
BoundFit lower_bound_check_neumann(const std::vector<FamilyMember>& family,
                                   const std::vector<FamilyMember>& held_out = {}, std::string name = "family");
/// gamma_D = max_n Rayleigh(radial) n^2 V(n/2) / V(n); lambda^D(B(n)) <= gamma_D V(n) / (n^2 V(n/2)).
BoundFit upper_bound_check_dirichlet(const GroupSpec& spec, int n_min, int n_max);
/// gamma_N = max_n Rayleigh(linear) n^2; lambda^N(L_n) <= gamma_N / n^2.
BoundFit upper_bound_check_neumann(const GroupSpec& spec, Index n_min, Index n_max);

struct TetrahedronReport {
  int modulus = 0;
  int depth = 0;
  Index vertices = 0;
  Index expected_vertices = 0;
  double target = 0;           ///< 2m (1 - cos(pi/n))
  double eigen_distance = 0;   ///< min |lambda - target|
  Index multiplicity = 0;
  Index boundary_size = 0;
  double boundary_ratio = 0;   ///< max |v| on the inner boundary / max |v|
  double lowest_eigenvalue = 0;
  bool passed = false;
};

inline constexpr double kTetrahedronTolerance = 1e-8;

/// Facts about T_n: (n+1) m^n vertices, 2m(1 - cos(pi/n)) in spec(Delta^A(T_n)),
/// with an eigenvector vanishing on the inner vertex boundary.
TetrahedronReport tetrahedron_report(int modulus, int depth);
/// As tetrahedron_report, throwing OracleViolation when a fact fails.
TetrahedronReport tetrahedron_checks(int modulus, int depth);

/// Verified upper bounds lambda^#(G'_n) <= c_n and the step map n(E) = min{n : c_n <= E}.
struct SandwichInputs {
  BoundaryCondition bc = BoundaryCondition::Neumann;
  std::vector<Index> n;
  std::vector<double> c;
  std::vector<Index> sizes;
  std::vector<double> lambda;

  /// Position in the family of n(E), or -1 when no c_n <= E.
  Index position(double E) const;
  Index n_of(double E) const;
  Index size_of(double E) const;
};

SandwichInputs sandwich_inputs(const std::vector<FamilyMember>& family, std::vector<double> c,
                               BoundaryCondition bc);

}  // namespace percospec
