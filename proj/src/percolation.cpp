#include "percospec/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Core>

#include "percospec/errors.hpp"
#include "percospec/format.hpp"
#include "percospec/parallel.hpp"
#include "percospec/regression.hpp"
#include "percospec/rng.hpp"

namespace percospec {

std::string to_string(PercolationKind kind) { return kind == PercolationKind::Site ? "site" : "bond"; }

PercolationKind parse_percolation_kind(const std::string& text) {
  if (text == "site") return PercolationKind::Site;
  if (text == "bond") return PercolationKind::Bond;
  throw DomainError("unknown percolation model '" + text + "' (expected site or bond)");
}

void PercolationModel::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("percolation probability must lie in [0, 1]");
}

PercolationSample::PercolationSample(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                                     std::vector<unsigned char> marks, Index sample_index)
    : model_(model), window_(std::move(window)), marks_(std::move(marks)), sample_index_(sample_index) {
  model_.validate();
  if (!window_ || window_->size() == 0) throw DomainError("percolation window must be nonempty");
  const auto& edges = window_->edges();
  const Index expected = model_.kind == PercolationKind::Site ? window_->size() : static_cast<Index>(edges.size());
  if (static_cast<Index>(marks_.size()) != expected) throw DomainError("mark count does not match the window");

  std::vector<Edge> open_edges;
  if (model_.kind == PercolationKind::Site) {
    for (const auto& [u, v] : edges) {
      if (marks_[u] && marks_[v]) open_edges.emplace_back(u, v);
    }
  } else {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (marks_[e]) open_edges.push_back(edges[e]);
    }
  }
  open_graph_ = Adjacency::from_edges(window_->size(), open_edges);

  active_.assign(static_cast<std::size_t>(window_->size()), 0);
  for (Index v = 0; v < window_->size(); ++v) {
    active_[v] = model_.kind == PercolationKind::Site ? (marks_[v] != 0) : (open_graph_.degree(v) > 0);
  }
  active_count_ = std::count(active_.begin(), active_.end(), 1);
}

PercolationSample PercolationSample::draw(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                                          Index sample_index) {
  if (!window) throw DomainError("percolation window must be nonempty");
  const Index items =
      model.kind == PercolationKind::Site ? window->size() : static_cast<Index>(window->edges().size());
  std::vector<unsigned char> marks(static_cast<std::size_t>(items));
  for (Index j = 0; j < items; ++j) {
    marks[j] = counter_uniform(model.seed, static_cast<std::uint64_t>(sample_index), static_cast<std::uint64_t>(j)) <
               model.p;
  }
  return PercolationSample(model, std::move(window), std::move(marks), sample_index);
}

PercolationSample PercolationSample::from_marks(const PercolationModel& model,
                                                std::shared_ptr<const CayleyPatch> window,
                                                std::vector<unsigned char> marks, Index sample_index) {
  for (auto& m : marks) m = m != 0;
  return PercolationSample(model, std::move(window), std::move(marks), sample_index);
}

std::vector<Index> PercolationSample::active_vertices() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(active_count_));
  for (Index v = 0; v < static_cast<Index>(active_.size()); ++v) {
    if (active_[v]) out.push_back(v);
  }
  return out;
}

PercolationSample sample(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                         Index sample_index) {
  return PercolationSample::draw(model, std::move(window), sample_index);
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(Index n) : parent_(static_cast<std::size_t>(n)), rank_(static_cast<std::size_t>(n), 0) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<Index> parent_;
  std::vector<int> rank_;
};

}  // namespace

ClusterDecomposition decompose(const PercolationSample& sample) {
  const Index n = sample.window().size();
  const Adjacency& open = sample.open_graph();
  UnionFind uf(n);
  for (Index u = 0; u < n; ++u) {
    for (Index v : open.neighbors(u)) {
      if (u < v) uf.unite(u, v);
    }
  }
  ClusterDecomposition out;
  out.label.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> root_label(static_cast<std::size_t>(n), -1);
  for (Index v = 0; v < n; ++v) {
    if (!sample.is_active(v)) continue;
    const Index r = uf.find(v);
    if (root_label[r] < 0) {
      root_label[r] = out.cluster_count();
      out.sizes.push_back(0);
    }
    out.label[v] = root_label[r];
    ++out.sizes[root_label[r]];
  }
  if (n > 0 && out.label[0] >= 0) {
    const Index origin = out.label[0];
    out.origin_cluster_size = out.sizes[origin];
    const int k = sample.window().degree();
    const Adjacency& full = sample.window().adjacency();
    for (Index v = 0; v < n && !out.origin_touches_boundary; ++v) {
      out.origin_touches_boundary = out.label[v] == origin && full.degree(v) < k;
    }
  }
  return out;
}

ClusterStats cluster_stats(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                           Index n_samples, std::span<const Index> tail_grid, int workers) {
  if (n_samples < 100) throw DomainError("cluster_stats needs at least 100 samples");
  model.validate();
  struct PerSample {
    Index origin_size = 0;
    Index clusters = 0;
    Index active = 0;
    bool touches = false;
  };
  std::vector<PerSample> results(static_cast<std::size_t>(n_samples));
  parallel_for(n_samples, workers, [&](Index i) {
    const auto s = PercolationSample::draw(model, window, i);
    const auto d = decompose(s);
    results[i] = {d.origin_cluster_size, d.cluster_count(), s.active_count(), d.origin_touches_boundary};
  });

  const double volume = static_cast<double>(window->size());
  const double N = static_cast<double>(n_samples);
  ClusterStats stats;
  stats.samples = n_samples;
  double cpv = 0, cpv2 = 0, del = 0, del2 = 0, touch = 0;
  for (const auto& r : results) {
    const double c = static_cast<double>(r.clusters) / volume;
    const double g = (volume - static_cast<double>(r.active)) / volume;
    cpv += c;
    cpv2 += c * c;
    del += g;
    del2 += g * g;
    touch += r.touches;
  }
  auto standard_error = [N](double sum, double sum2) {
    const double mean = sum / N;
    return std::sqrt(std::max(0.0, sum2 / N - mean * mean) / (N - 1.0));
  };
  stats.clusters_per_vertex = cpv / N;
  stats.clusters_per_vertex_stderr = standard_error(cpv, cpv2);
  stats.deleted_density = del / N;
  stats.deleted_density_stderr = standard_error(del, del2);
  stats.origin_boundary_fraction = touch / N;

  for (Index n : tail_grid) {
    TailPoint point;
    point.n = n;
    for (const auto& r : results) point.hits += r.origin_size >= n;
    point.tail = static_cast<double>(point.hits) / N;
    point.std_error = std::sqrt(point.tail * (1.0 - point.tail) / N);
    stats.tail.push_back(point);
  }

  std::vector<double> xs, ys;
  for (const auto& point : stats.tail) {
    if (point.hits >= kMinTailHits) {
      xs.push_back(static_cast<double>(point.n));
      ys.push_back(std::log(point.tail));
    }
  }
  if (xs.size() >= 3) {
    const Eigen::Map<const Eigen::VectorXd> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
    const auto line = fit_line(x, y);
    stats.tau_fit = {true, -line.slope, line.intercept, line.r2, static_cast<Index>(xs.front()),
                     static_cast<Index>(xs.back()), line.points};
  } else {
    stats.tau_fit.points = static_cast<Index>(xs.size());
  }
  return stats;
}

double deleted_density_expected(const PercolationModel& model, int degree) {
  model.validate();
  if (degree < 1) throw DomainError("degree must be >= 1");
  return model.kind == PercolationKind::Site ? 1.0 - model.p : std::pow(1.0 - model.p, degree);
}

double origin_crossing_probability(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                                   Index n_samples, int workers) {
  if (n_samples < 1) throw DomainError("need at least one sample");
  std::vector<unsigned char> touched(static_cast<std::size_t>(n_samples), 0);
  parallel_for(n_samples, workers, [&](Index i) {
    touched[i] = decompose(PercolationSample::draw(model, window, i)).origin_touches_boundary;
  });
  return static_cast<double>(std::count(touched.begin(), touched.end(), 1)) / static_cast<double>(n_samples);
}

CriticalBracket bracket_critical_p(PercolationKind kind, const GroupSpec& spec, int radius, Index n_samples,
                                   std::uint64_t seed, int iterations, int workers) {
  if (radius < 1) throw DomainError("bracket radius must be >= 1");
  auto small = std::make_shared<const CayleyBall>(enumerate_ball(spec, radius));
  auto large = std::make_shared<const CayleyBall>(enumerate_ball(spec, 2 * radius));
  CriticalBracket bracket;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (bracket.lower + bracket.upper);
    const PercolationModel model{kind, mid, mix64(seed + static_cast<std::uint64_t>(it))};
    const double near = origin_crossing_probability(model, small, n_samples, workers);
    const double far = origin_crossing_probability(model, large, n_samples, workers);
    if (near == 0.0 || far < 0.5 * near) {
      bracket.lower = mid;
    } else {
      bracket.upper = mid;
    }
  }
  return bracket;
}

void write_sample(std::ostream& out, const PercolationSample& sample) {
  const auto& m = sample.model();
  out << "# model=" << to_string(m.kind) << " p=" << format_double(m.p) << " seed=" << m.seed
      << " index=" << sample.sample_index() << '\n';
  const auto marks = sample.open_marks();
  for (std::size_t j = 0; j < marks.size(); ++j) {
    if (marks[j]) out << j << '\n';
  }
}

void write_tail_csv(std::ostream& out, const ClusterStats& stats) {
  out << "n,tail,stderr\n";
  for (const auto& point : stats.tail) {
    out << point.n << ',' << format_double(point.tail) << ',' << format_double(point.std_error) << '\n';
  }
}

}  // namespace percospec
