#include <doctest.h>

#include <cmath>
#include <sstream>

#include "percospec/errors.hpp"
#include "percospec/percolation.hpp"

using namespace percospec;

namespace {

std::shared_ptr<const CayleyBall> ball(const GroupSpec& spec, int r) {
  return std::make_shared<const CayleyBall>(enumerate_ball(spec, r));
}

/// P(|C_o| >= n) for site percolation on Z: |C_o| = s with probability s p^s (1-p)^2.
double z1_site_tail(double p, Index n) {
  if (n <= 0) return 1.0;
  double tail = p;
  for (Index s = 1; s < n; ++s) tail -= static_cast<double>(s) * std::pow(p, static_cast<double>(s)) * (1 - p) * (1 - p);
  return tail;
}

}  // namespace

TEST_CASE("model validation") {
  CHECK_THROWS_AS((PercolationModel{PercolationKind::Site, 1.5, 0}.validate()), DomainError);
  CHECK_THROWS_AS((PercolationModel{PercolationKind::Bond, -0.1, 0}.validate()), DomainError);
  CHECK(parse_percolation_kind("bond") == PercolationKind::Bond);
  CHECK_THROWS_AS(parse_percolation_kind("mixed"), DomainError);
}

TEST_CASE("samples are reproducible and monotone in p") {
  const auto w = ball(GroupSpec::free_abelian(2), 6);
  for (auto kind : {PercolationKind::Site, PercolationKind::Bond}) {
    const auto a = PercolationSample::draw({kind, 0.4, 9}, w, 3);
    const auto b = PercolationSample::draw({kind, 0.4, 9}, w, 3);
    const auto c = PercolationSample::draw({kind, 0.7, 9}, w, 3);
    CHECK(std::equal(a.open_marks().begin(), a.open_marks().end(), b.open_marks().begin()));
    for (std::size_t j = 0; j < a.open_marks().size(); ++j) CHECK(a.open_marks()[j] <= c.open_marks()[j]);
    const auto other = PercolationSample::draw({kind, 0.4, 9}, w, 4);
    CHECK_FALSE(std::equal(a.open_marks().begin(), a.open_marks().end(), other.open_marks().begin()));
  }
}

TEST_CASE("extreme p") {
  const auto w = ball(GroupSpec::free_abelian(2), 4);
  CHECK(sample({PercolationKind::Site, 0.0, 1}, w, 0).active_count() == 0);
  CHECK(sample({PercolationKind::Site, 1.0, 1}, w, 0).active_count() == w->size());
  const auto full_bond = sample({PercolationKind::Bond, 1.0, 1}, w, 0);
  CHECK(full_bond.active_count() == w->size());
  CHECK(full_bond.open_graph().edge_count() == static_cast<Index>(w->edges().size()));
  CHECK(decompose(full_bond).cluster_count() == 1);
}

TEST_CASE("bond activity means an open incident edge") {
  const auto w = ball(GroupSpec::free_abelian(2), 5);
  const auto s = sample({PercolationKind::Bond, 0.3, 5}, w, 0);
  for (Index v = 0; v < w->size(); ++v) CHECK(s.is_active(v) == (s.open_graph().degree(v) > 0));
}

TEST_CASE("site open graph is the induced subgraph on open sites") {
  const auto w = ball(GroupSpec::free_abelian(2), 5);
  const auto s = sample({PercolationKind::Site, 0.5, 2}, w, 1);
  for (const auto& [u, v] : w->edges()) {
    const auto nb = s.open_graph().neighbors(u);
    const bool present = std::find(nb.begin(), nb.end(), v) != nb.end();
    CHECK(present == (s.is_active(u) && s.is_active(v)));
  }
}

TEST_CASE("explicit marks and cluster decomposition on a path") {
  auto w = std::make_shared<const FiniteSubgraph>(line_subgraph(GroupSpec::free_abelian(1), 7));
  // vertices -3..3; open: -3,-2, 0,1, 3
  const std::vector<unsigned char> marks{1, 1, 0, 1, 1, 0, 1};
  const auto s = PercolationSample::from_marks({PercolationKind::Site, 0.5, 0}, w, marks);
  const auto d = decompose(s);
  CHECK(d.cluster_count() == 3);
  CHECK(d.sizes == std::vector<Index>{2, 2, 1});
  CHECK(d.label[2] == -1);
  CHECK_THROWS_AS(PercolationSample::from_marks({PercolationKind::Site, 0.5, 0}, w, {1, 0}), DomainError);
}

TEST_CASE("origin cluster on a ball touches the boundary when fully open") {
  const auto w = ball(GroupSpec::free_abelian(2), 3);
  const auto d = decompose(sample({PercolationKind::Site, 1.0, 0}, w, 0));
  CHECK(d.origin_cluster_size == w->size());
  CHECK(d.origin_touches_boundary);
  const auto none = decompose(sample({PercolationKind::Site, 0.0, 0}, w, 0));
  CHECK(none.origin_cluster_size == 0);
  CHECK_FALSE(none.origin_touches_boundary);
}

TEST_CASE("Z site tail matches the renewal oracle and clusters per vertex is p(1-p)") {
  const auto w = ball(GroupSpec::free_abelian(1), 60);
  const std::vector<Index> grid{1, 2, 3, 4, 5, 6, 7, 8};
  const auto stats = cluster_stats({PercolationKind::Site, 0.5, 17}, w, 4000, grid);
  for (const auto& t : stats.tail) {
    CHECK(std::abs(t.tail - z1_site_tail(0.5, t.n)) <= 3.0 * t.std_error + 1e-12);
  }
  // window edge effects are O(1/|window|)
  CHECK(std::abs(stats.clusters_per_vertex - 0.25) <= 3.0 * stats.clusters_per_vertex_stderr + 0.01);
  CHECK(std::abs(stats.deleted_density - 0.5) <= 3.0 * stats.deleted_density_stderr);
  CHECK(stats.tau_fit.valid);
  CHECK(stats.tau_fit.tau == doctest::Approx(std::log(2.0)).epsilon(0.2));
}

TEST_CASE("cluster statistics do not depend on the worker count") {
  const auto w = ball(GroupSpec::free_abelian(2), 6);
  const std::vector<Index> grid{1, 2, 4, 8};
  const auto one = cluster_stats({PercolationKind::Bond, 0.3, 4}, w, 200, grid, 1);
  const auto many = cluster_stats({PercolationKind::Bond, 0.3, 4}, w, 200, grid, 8);
  CHECK(one.clusters_per_vertex == many.clusters_per_vertex);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(one.tail[i].tail == many.tail[i].tail);
  std::ostringstream a, b;
  write_tail_csv(a, one);
  write_tail_csv(b, many);
  CHECK(a.str() == b.str());
}

TEST_CASE("expected deleted density") {
  CHECK(deleted_density_expected({PercolationKind::Site, 0.3, 0}, 4) == doctest::Approx(0.7));
  CHECK(deleted_density_expected({PercolationKind::Bond, 0.5, 0}, 4) == doctest::Approx(1.0 / 16));
}

TEST_CASE("critical bracket for bond percolation on Z^2 straddles a plausible range") {
  const auto b = bracket_critical_p(PercolationKind::Bond, GroupSpec::free_abelian(2), 6, 300, 3, 6);
  CHECK(b.lower < b.upper);
  CHECK(b.lower > 0.2);
  CHECK(b.upper < 0.8);
  CHECK(b.subcritical_limit() < b.lower);
}

TEST_CASE("sample export") {
  auto w = std::make_shared<const FiniteSubgraph>(line_subgraph(GroupSpec::free_abelian(1), 3));
  const auto s = PercolationSample::from_marks({PercolationKind::Site, 0.25, 8}, w, {1, 0, 1}, 2);
  std::ostringstream out;
  write_sample(out, s);
  CHECK(out.str() == "# model=site p=0.25 seed=8 index=2\n0\n2\n");
}
