#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "percospec/errors.hpp"
#include "percospec/operators.hpp"

using namespace percospec;

namespace {

Eigen::VectorXd eigs(const LabeledOperator& op) {
  if (op.dim() == 0) return {};
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op.dense(), Eigen::EigenvaluesOnly).eigenvalues();
}

std::shared_ptr<const CayleyPatch> patch_of(const FiniteSubgraph& g) { return std::make_shared<const FiniteSubgraph>(g); }

std::shared_ptr<const CayleyBall> ball(const GroupSpec& spec, int r) {
  return std::make_shared<const CayleyBall>(enumerate_ball(spec, r));
}

PercolationSample two_site_z() {
  // window {-1, 0, 1, 2}; sites 0 and 1 open
  auto w = patch_of(line_subgraph(GroupSpec::free_abelian(1), 4));
  return PercolationSample::from_marks({PercolationKind::Site, 0.5, 0}, w, {0, 1, 1, 0});
}

Index cluster_count(const PercolationSample& s) {
  const auto c = connected_components(s.open_graph(), s.active());
  return c.count();
}

}  // namespace

TEST_CASE("free laplacian of small windows") {
  const auto z = line_subgraph(GroupSpec::free_abelian(1), 3);
  Eigen::MatrixXd expected(3, 3);
  expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  CHECK(free_laplacian(z).dense() == expected);
  const auto single = line_subgraph(GroupSpec::free_abelian(2), 1);
  CHECK(free_laplacian(single).dense()(0, 0) == 4);
  const auto b2 = enumerate_ball(GroupSpec::free_abelian(2), 2);
  const auto op = free_laplacian(b2);
  for (Index v = 0; v < b2.size(); ++v) {
    Index inside = b2.adjacency().degree(v);
    CHECK(op.dense().row(v).sum() == doctest::Approx(4 - inside));
  }
}

TEST_CASE("two-site cluster in Z has the closed-form spectra") {
  const auto s = two_site_z();
  const auto n = percolation_laplacian(s, BoundaryCondition::Neumann);
  const auto a = percolation_laplacian(s, BoundaryCondition::Adjacency);
  const auto d = percolation_laplacian(s, BoundaryCondition::Dirichlet);
  Eigen::MatrixXd mn(2, 2), ma(2, 2), md(2, 2);
  mn << 1, -1, -1, 1;
  ma << 2, -1, -1, 2;
  md << 3, -1, -1, 3;
  CHECK(n.dense() == mn);
  CHECK(a.dense() == ma);
  CHECK(d.dense() == md);
  CHECK((eigs(n) - Eigen::Vector2d(0, 2)).norm() < 1e-12);
  CHECK((eigs(a) - Eigen::Vector2d(1, 3)).norm() < 1e-12);
  CHECK((eigs(d) - Eigen::Vector2d(2, 4)).norm() < 1e-12);
  const auto w = boundary_potential(s);
  CHECK(Eigen::MatrixXd(d.matrix - a.matrix) == w.dense());
  CHECK(Eigen::MatrixXd(a.matrix - n.matrix) == w.dense());
}

TEST_CASE("isolated open vertex in Z^2") {
  auto w = ball(GroupSpec::free_abelian(2), 1);
  const auto s = PercolationSample::from_marks({PercolationKind::Site, 0.5, 0}, w, {1, 0, 0, 0, 0});
  CHECK(percolation_laplacian(s, BoundaryCondition::Neumann).dense()(0, 0) == 0);
  CHECK(percolation_laplacian(s, BoundaryCondition::Adjacency).dense()(0, 0) == 4);
  CHECK(percolation_laplacian(s, BoundaryCondition::Dirichlet).dense()(0, 0) == 8);
  CHECK(boundary_potential(s).dense()(0, 0) == 4);
}

TEST_CASE("empty active set gives a 0x0 operator") {
  auto w = ball(GroupSpec::free_abelian(2), 2);
  const auto s = sample({PercolationKind::Site, 0.0, 1}, w, 0);
  CHECK(percolation_laplacian(s, BoundaryCondition::Dirichlet).dim() == 0);
  const auto ext = extend(percolation_laplacian(s, BoundaryCondition::Neumann), *w, 7.0);
  CHECK(ext.dim() == w->size());
  CHECK(ext.dense() == Eigen::MatrixXd::Identity(w->size(), w->size()) * 7.0);
}

TEST_CASE("per-sample identities: D + N = 2A, traces, ordering, kernels") {
  const auto w = ball(GroupSpec::free_abelian(2), 6);
  for (auto kind : {PercolationKind::Site, PercolationKind::Bond}) {
    for (Index i = 0; i < 20; ++i) {
      const auto s = sample({kind, 0.55, 77}, w, i);
      const auto a = percolation_laplacian(s, BoundaryCondition::Adjacency);
      const auto d = percolation_laplacian(s, BoundaryCondition::Dirichlet);
      const auto n = percolation_laplacian(s, BoundaryCondition::Neumann);
      REQUIRE(Eigen::MatrixXd(d.matrix + n.matrix) == 2.0 * a.dense());
      const double edges = static_cast<double>(s.open_graph().edge_count());
      const double vertices = static_cast<double>(s.active_count());
      CHECK(a.trace() == 4 * vertices);
      CHECK(n.trace() == 2 * edges);
      CHECK(d.trace() == 8 * vertices - 2 * edges);
      CHECK(a.matrix.isApprox(a.matrix.transpose()));
      const auto en = eigs(n), ea = eigs(a), ed = eigs(d);
      CHECK((ea - en).minCoeff() >= -1e-10);
      CHECK((ed - ea).minCoeff() >= -1e-10);
      if (s.active_count() > 0) {
        CHECK(en.minCoeff() >= -1e-10);
        CHECK(ed.maxCoeff() <= 8 + 1e-10);
        CHECK(ea.minCoeff() > 1e-8);
        CHECK(ed.minCoeff() > 1e-8);
        CHECK((en.array().abs() < 1e-8).count() == cluster_count(s));
      }
    }
  }
}

TEST_CASE("extension adds K on deleted vertices") {
  const auto s = two_site_z();
  const auto ext = extend(percolation_laplacian(s, BoundaryCondition::Neumann), s.window(), 5.0);
  Eigen::VectorXd expected(4);
  expected << 0, 2, 5, 5;
  CHECK((eigs(ext) - expected).norm() < 1e-12);
  CHECK(ext.tag.label() == "extended_neumann_K5");
  CHECK(extension_is_separated(9, 4));
  CHECK_FALSE(extension_is_separated(0, 4));
  CHECK(extension_is_separated(-1, 4));

  auto w = ball(GroupSpec::free_abelian(2), 5);
  const auto r = sample({PercolationKind::Site, 0.5, 3}, w, 0);
  const auto zero = extend(percolation_laplacian(r, BoundaryCondition::Neumann), *w, 0.0);
  const Index deleted = w->size() - r.active_count();
  CHECK((eigs(zero).array().abs() < 1e-8).count() == deleted + cluster_count(r));
}

TEST_CASE("Bernoulli-Anderson operator") {
  auto w = ball(GroupSpec::free_abelian(2), 4);
  const auto s = sample({PercolationKind::Site, 0.5, 12}, w, 0);
  CHECK(anderson(s, 0.0).dense() == free_laplacian(*w).dense());
  const auto closed = sample({PercolationKind::Site, 0.0, 12}, w, 0);
  CHECK(anderson(closed, 10.0).dense() ==
        free_laplacian(*w).dense() + 10.0 * Eigen::MatrixXd::Identity(w->size(), w->size()));
  Eigen::VectorXd previous = eigs(anderson(s, 0.0));
  for (double lambda : {1.0, 10.0, 100.0}) {
    const Eigen::VectorXd current = eigs(anderson(s, lambda));
    CHECK((current - previous).minCoeff() >= -1e-10);
    previous = current;
  }
  CHECK_THROWS_AS(anderson(sample({PercolationKind::Bond, 0.5, 1}, w, 0), 1.0), DomainError);
  CHECK_THROWS_AS(anderson(s, -1.0), DomainError);
}

TEST_CASE("Bernoulli-Anderson bands split on Z at large coupling") {
  auto w = ball(GroupSpec::free_abelian(1), 8);
  for (Index i = 0; i < 20; ++i) {
    const Eigen::VectorXd e = eigs(anderson(sample({PercolationKind::Site, 0.5, 5}, w, i), 20.0));
    for (double x : e) CHECK_FALSE((x > 4.5 && x < 19.5));
  }
}

TEST_CASE("restriction") {
  const auto z = line_subgraph(GroupSpec::free_abelian(1), 3);
  const auto op = free_laplacian(z);
  const std::vector<Index> centre{1};
  CHECK(restrict(op, centre).dense()(0, 0) == 2);
  const std::vector<Index> all{0, 1, 2};
  CHECK(restrict(op, all).dense() == op.dense());
  const std::vector<Index> bad{5};
  CHECK_THROWS_AS(restrict(op, bad), DomainError);
  const std::vector<Index> dup{0, 0};
  CHECK_THROWS_AS(restrict(op, dup), DomainError);

  const auto b = enumerate_ball(GroupSpec::free_abelian(2), 4);
  std::vector<Index> subset;
  for (Index v = 0; v < b.size(); v += 3) subset.push_back(v);
  const auto sub = induced_subgraph(b, subset);
  CHECK(restrict(free_laplacian(b), subset).dense() ==
        subgraph_laplacian(sub, BoundaryCondition::Adjacency).dense());
}

TEST_CASE("bipartite conjugation relates the three Laplacians") {
  auto w = ball(GroupSpec::free_abelian(2), 5);
  const Bipartition colours = is_bipartite(*w);
  for (Index i = 0; i < 10; ++i) {
    const auto s = sample({PercolationKind::Site, 0.6, 31}, w, i);
    const auto a = percolation_laplacian(s, BoundaryCondition::Adjacency);
    const auto n = percolation_laplacian(s, BoundaryCondition::Neumann);
    const auto d = percolation_laplacian(s, BoundaryCondition::Dirichlet);
    const std::vector<int>& c = colours.colour;
    const Eigen::MatrixXd twok = 8.0 * Eigen::MatrixXd::Identity(a.dim(), a.dim());
    CHECK((twok - bipartite_conjugate(a, c).dense()).isApprox(a.dense()));
    CHECK((twok - bipartite_conjugate(d, c).dense()).isApprox(n.dense()));
    const Eigen::VectorXd ea = eigs(a);
    CHECK((ea + ea.reverse() - Eigen::VectorXd::Constant(ea.size(), 8.0)).cwiseAbs().maxCoeff() < 1e-10);
  }
  const auto s = two_site_z();
  const auto a = percolation_laplacian(s, BoundaryCondition::Adjacency);
  const std::vector<int> same{1, 1};
  CHECK_THROWS_AS(bipartite_conjugate(a, same), DomainError);
  const std::vector<int> diagonal_colours{1, 1, -1, 1, 1};
  const auto diag = boundary_potential(PercolationSample::from_marks(
      {PercolationKind::Site, 0.5, 0}, patch_of(line_subgraph(GroupSpec::free_abelian(1), 5)), {1, 0, 1, 0, 1}));
  CHECK(bipartite_conjugate(diag, diagonal_colours).dense() == diag.dense());
}

TEST_CASE("translated samples have the same spectrum") {
  const GroupSpec h = GroupSpec::heisenberg();
  const auto b = enumerate_ball(h, 4);
  GroupElement g;
  g.code = {3, -2, 5};
  std::vector<GroupElement> moved;
  for (const auto& x : b.elements()) moved.push_back(h.multiply(g, x));
  auto original = std::make_shared<const CayleyPatch>(h, b.elements());
  auto shifted = std::make_shared<const CayleyPatch>(h, moved);
  CHECK(original->edges() == shifted->edges());
  const auto s = sample({PercolationKind::Site, 0.6, 2}, original, 0);
  std::vector<unsigned char> marks(s.open_marks().begin(), s.open_marks().end());
  const auto t = PercolationSample::from_marks(s.model(), shifted, marks);
  for (auto bc : {BoundaryCondition::Adjacency, BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}) {
    const Eigen::VectorXd e1 = eigs(percolation_laplacian(s, bc)), e2 = eigs(percolation_laplacian(t, bc));
    CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("compression and its decoupled bracket") {
  auto host = ball(GroupSpec::free_abelian(2), 7);
  std::vector<Index> window(static_cast<std::size_t>(host->volumes()[6]));
  for (std::size_t v = 0; v < window.size(); ++v) window[v] = static_cast<Index>(v);
  for (Index i = 0; i < 10; ++i) {
    const auto s = sample({PercolationKind::Site, 0.7, 8}, host, i);
    for (auto bc : {BoundaryCondition::Adjacency, BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}) {
      const auto h = compressed_laplacian(s, bc, window);
      const auto [lower, upper] = decoupled_laplacians(s, bc, window);
      const Eigen::VectorXd e = eigs(h), lo = eigs(lower), hi = eigs(upper);
      CHECK((e - lo).minCoeff() >= -1e-10);
      CHECK((hi - e).minCoeff() >= -1e-10);
    }
    const std::vector<Index> everything = [&] {
      std::vector<Index> all(static_cast<std::size_t>(host->size()));
      for (std::size_t v = 0; v < all.size(); ++v) all[v] = static_cast<Index>(v);
      return all;
    }();
    CHECK(compressed_laplacian(s, BoundaryCondition::Neumann, everything).dense() ==
          percolation_laplacian(s, BoundaryCondition::Neumann).dense());
  }
}

TEST_CASE("matrix export") {
  const auto s = two_site_z();
  std::ostringstream out;
  write_matrix(out, percolation_laplacian(s, BoundaryCondition::Adjacency));
  CHECK(out.str() == "# n=2 sym=1 tag=perc_adjacency\n0 0 2\n0 1 -1\n1 1 2\n");
  CHECK(parse_boundary_condition("dirichlet") == BoundaryCondition::Dirichlet);
  CHECK_THROWS_AS(parse_boundary_condition("robin"), DomainError);
}
