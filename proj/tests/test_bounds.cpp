#include <doctest.h>

#include <cmath>
#include <numbers>

#include "percospec/bounds.hpp"
#include "percospec/errors.hpp"
#include "percospec/spectra.hpp"

using namespace percospec;

namespace {

double relative_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("test functions and Rayleigh quotients") {
  const auto l3 = subgraph_laplacian(line_subgraph(GroupSpec::free_abelian(1), 3), BoundaryCondition::Neumann);
  const TestFunction lin = neumann_linear(3);
  CHECK(lin.values == Eigen::Vector3d(-1, 0, 1));
  CHECK(rayleigh(l3, lin) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lowest_nonzero(l3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(neumann_linear(4).values.sum() == 0.0);

  const auto b1 = enumerate_ball(GroupSpec::free_abelian(1), 1);
  const TestFunction radial = dirichlet_radial(b1, 1);
  CHECK(radial.values == Eigen::Vector3d(1, 0, 0));
  const auto d1 = subgraph_laplacian(ball_subgraph(b1, 1), BoundaryCondition::Dirichlet);
  CHECK(rayleigh(d1, radial) == doctest::Approx(2.0));
  CHECK(rayleigh(d1, radial) >= eigenvalues_dense(d1).eigenvalues[0]);

  const auto b6 = enumerate_ball(GroupSpec::free_abelian(2), 6);
  const TestFunction r5 = dirichlet_radial(b6, 5);
  CHECK(r5.values.size() == b6.volumes()[5]);
  CHECK(r5.values[0] == 3);
  CHECK(r5.values.minCoeff() == 0);
  CHECK(r5.values.maxCoeff() == 3);

  TestFunction constant{Eigen::VectorXd::Ones(3), TestFunctionKind::Custom};
  CHECK_THROWS_AS(rayleigh(l3, constant), DegenerateError);
  TestFunction zero{Eigen::VectorXd::Zero(3), TestFunctionKind::Custom};
  CHECK_THROWS_AS(rayleigh(d1, zero), DegenerateError);
}

TEST_CASE("Rayleigh quotients bound the lowest eigenvalue") {
  for (int n = 1; n <= 6; ++n) {
    const auto b = enumerate_ball(GroupSpec::free_abelian(2), n);
    const auto op = subgraph_laplacian(ball_subgraph(b, n), BoundaryCondition::Dirichlet);
    CHECK(rayleigh(op, dirichlet_radial(b, n)) >= eigenvalues_dense(op).eigenvalues[0] - 1e-10);
  }
  for (Index n = 2; n <= 40; n += 3) {
    const auto op = subgraph_laplacian(line_subgraph(GroupSpec::free_abelian(1), n), BoundaryCondition::Neumann);
    CHECK(rayleigh(op, neumann_linear(n)) >= lowest_nonzero(op) - 1e-10);
  }
}

TEST_CASE("Neumann path eigenvalue scales like pi^2 / n^2") {
  const auto op = subgraph_laplacian(line_subgraph(GroupSpec::free_abelian(1), 64), BoundaryCondition::Neumann);
  const double scaled = lowest_nonzero(op) * 64 * 64;
  CHECK(std::abs(scaled - std::numbers::pi * std::numbers::pi) / (std::numbers::pi * std::numbers::pi) < 0.01);
  const auto fit = lower_bound_check_neumann(line_family(GroupSpec::free_abelian(1), 2, 64));
  CHECK(fit.constant == doctest::Approx(8.0));  // n = 2: lambda 2 times 4
  CHECK(fit.violations == 0);
  double previous = 0;
  for (const auto& m : fit.per_member) {
    const double scaled_n = m.lambda * static_cast<double>(m.size * m.size);
    CHECK(scaled_n >= previous);
    CHECK(m.lambda >= m.bound - 1e-12);
    previous = scaled_n;
  }
}

TEST_CASE("adjacency lower bound on balls and lines") {
  const auto z2 = GroupSpec::free_abelian(2);
  const auto growth = growth_profile(z2, 40);
  const auto balls = lower_bound_check_adjacency(ball_family(z2, 1, 8), growth, ball_family(z2, 9, 12), "balls");
  CHECK(balls.constant > 0);
  CHECK(balls.violations == 0);
  CHECK(balls.held_out_violations == 0);
  CHECK(balls.fit_min == 1);
  CHECK(balls.fit_max == 8);

  const auto z1 = GroupSpec::free_abelian(1);
  const auto g1 = growth_profile(z1, 200);
  const auto lines = lower_bound_check_adjacency(line_family(z1, 2, 64), g1, line_family(z1, 65, 128), "lines");
  CHECK(lines.constant > 0);
  CHECK(lines.violations == 0);
  CHECK(lines.held_out_violations == 0);
  // Doubling the family leaves the constant within 20%.
  const auto longer = lower_bound_check_adjacency(line_family(z1, 2, 128), g1, {}, "lines");
  CHECK(relative_change(lines.constant, longer.constant) < 0.2);
  const auto more_balls = lower_bound_check_adjacency(ball_family(z2, 1, 16), growth, {}, "balls");
  CHECK(relative_change(balls.constant, more_balls.constant) < 0.2);

  const auto single = lower_bound_check_adjacency(ball_family(z2, 0, 0), growth);
  CHECK(single.per_member.front().lambda == doctest::Approx(4.0));
  CHECK(single.constant == doctest::Approx(4.0));
}

TEST_CASE("Neumann lower bound on balls") {
  const auto fit = lower_bound_check_neumann(ball_family(GroupSpec::free_abelian(2), 1, 8), {}, "balls");
  CHECK(fit.constant > 0);
  CHECK(fit.violations == 0);
  auto scaled = [](const BoundMember& m) { return m.lambda * static_cast<double>(m.size * m.size); };
  for (std::size_t i = 1; i < fit.per_member.size(); ++i) CHECK(scaled(fit.per_member[i]) > scaled(fit.per_member[i - 1]));
  const auto longer = lower_bound_check_neumann(line_family(GroupSpec::free_abelian(1), 2, 128));
  CHECK(relative_change(longer.constant, lower_bound_check_neumann(line_family(GroupSpec::free_abelian(1), 2, 64)).constant) <
        0.2);
}

TEST_CASE("test-function upper bounds") {
  const auto d = upper_bound_check_dirichlet(GroupSpec::free_abelian(2), 2, 10);
  CHECK(d.constant > 0);
  CHECK(d.violations == 0);
  CHECK(d.per_member.size() == 9);
  for (const auto& m : d.per_member) CHECK(m.lambda <= m.bound + 1e-10);
  const auto d1 = upper_bound_check_dirichlet(GroupSpec::free_abelian(1), 1, 1);
  CHECK(d1.constant == doctest::Approx(2.0 / 3.0));

  const auto n = upper_bound_check_neumann(GroupSpec::free_abelian(1), 2, 64);
  CHECK(n.violations == 0);
  CHECK(n.constant >= std::numbers::pi * std::numbers::pi * 0.99);
  CHECK(n.constant <= 12.0 + 1e-9);
  const auto doubled = upper_bound_check_neumann(GroupSpec::free_abelian(1), 2, 128);
  CHECK(relative_change(n.constant, doubled.constant) < 0.2);
  CHECK_THROWS_AS(upper_bound_check_neumann(GroupSpec::free_abelian(1), 1, 4), DomainError);
}

TEST_CASE("lamplighter tetrahedra") {
  CHECK(tetrahedron(2, 2).size() == 12);
  const auto r24 = tetrahedron_report(2, 4);
  CHECK(r24.target == doctest::Approx(4 - 2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(tetrahedron_report(3, 3).target == doctest::Approx(3.0).epsilon(1e-14));
  for (int m : {2, 3}) {
    for (int n = 2; n <= 5; ++n) {
      const TetrahedronReport r = tetrahedron_checks(m, n);
      CAPTURE(m);
      CAPTURE(n);
      CHECK(r.vertices == (n + 1) * static_cast<Index>(std::pow(m, n)));
      CHECK(r.vertices == r.expected_vertices);
      CHECK(r.eigen_distance <= kTetrahedronTolerance);
      CHECK(r.boundary_ratio <= kTetrahedronTolerance);
      CHECK(r.multiplicity >= 1);
      CHECK(r.lowest_eigenvalue <= r.target + 1e-10);
      CHECK(r.passed);
    }
  }
  CHECK_THROWS_AS(tetrahedron_report(2, 1), DomainError);
}

TEST_CASE("sandwich step map") {
  const auto family = line_family(GroupSpec::free_abelian(1), 2, 64);
  std::vector<double> c;
  for (const auto& m : family) c.push_back(2 * (1 - std::cos(std::numbers::pi / static_cast<double>(m.n))));
  const SandwichInputs in = sandwich_inputs(family, c, BoundaryCondition::Neumann);
  CHECK(in.n.front() == 2);
  CHECK(in.n_of(4.0) == 2);
  CHECK(in.n_of(1e-6) == -1);
  CHECK(in.position(1e-6) == -1);
  CHECK(in.size_of(1.0) == 3);  // c_3 = 1

  std::vector<double> pi_family;
  for (const auto& m : family) pi_family.push_back(std::numbers::pi * std::numbers::pi / static_cast<double>(m.n * m.n));
  const SandwichInputs loose = sandwich_inputs(family, pi_family, BoundaryCondition::Neumann);
  CHECK(loose.n_of(0.1) == 10);

  std::vector<double> too_small(c.size(), 1e-3);
  CHECK_THROWS_AS(sandwich_inputs(family, too_small, BoundaryCondition::Neumann), OracleViolation);

  std::vector<FamilyMember> tetrahedra;
  std::vector<double> targets;
  for (int n = 2; n <= 6; ++n) {
    tetrahedra.push_back({n, tetrahedron(2, n)});
    targets.push_back(4 * (1 - std::cos(std::numbers::pi / n)));
  }
  CHECK_NOTHROW(sandwich_inputs(tetrahedra, targets, BoundaryCondition::Adjacency));
  CHECK_NOTHROW(sandwich_inputs(tetrahedra, targets, BoundaryCondition::Dirichlet));
}
