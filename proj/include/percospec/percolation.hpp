#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "percospec/cayley.hpp"
#include "percospec/graph.hpp"
#include "percospec/types.hpp"

namespace percospec {

enum class PercolationKind { Site, Bond };

std::string to_string(PercolationKind kind);
PercolationKind parse_percolation_kind(const std::string& text);

struct PercolationModel {
  PercolationKind kind = PercolationKind::Site;
  double p = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Open/closed marks on the sites (site model) or edges (bond model) of a
/// window. Item j of sample i is open iff counter_uniform(seed, i, j) < p, so
/// marks do not depend on evaluation order and are monotone in p.
class PercolationSample {
 public:
  static PercolationSample draw(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                                Index sample_index);
  /// Explicit marks: one per window vertex (site) or per window edge (bond).
  static PercolationSample from_marks(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                                      std::vector<unsigned char> marks, Index sample_index = 0);

  const PercolationModel& model() const noexcept { return model_; }
  const CayleyPatch& window() const noexcept { return *window_; }
  const std::shared_ptr<const CayleyPatch>& window_ptr() const noexcept { return window_; }
  Index sample_index() const noexcept { return sample_index_; }

  std::span<const unsigned char> open_marks() const noexcept { return marks_; }
  /// Membership in V(omega) per window vertex. For bond samples a vertex is
  /// active iff it has an open incident edge.
  std::span<const unsigned char> active() const noexcept { return active_; }
  bool is_active(Index v) const noexcept { return active_[v] != 0; }
  Index active_count() const noexcept { return active_count_; }
  std::vector<Index> active_vertices() const;
  /// The percolation subgraph G(omega) inside the window.
  const Adjacency& open_graph() const noexcept { return open_graph_; }

 private:
  PercolationSample(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                    std::vector<unsigned char> marks, Index sample_index);

  PercolationModel model_;
  std::shared_ptr<const CayleyPatch> window_;
  std::vector<unsigned char> marks_;
  std::vector<unsigned char> active_;
  Index active_count_ = 0;
  Adjacency open_graph_;
  Index sample_index_ = 0;
};

PercolationSample sample(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                         Index sample_index);

struct ClusterDecomposition {
  std::vector<Index> label;  ///< cluster id per window vertex, -1 when inactive
  std::vector<Index> sizes;
  Index origin_cluster_size = 0;  ///< |C_o|, 0 when vertex 0 is inactive
  bool origin_touches_boundary = false;

  Index cluster_count() const noexcept { return static_cast<Index>(sizes.size()); }
};

/// Union-find over the open adjacency of the window. Vertex 0 is the origin.
ClusterDecomposition decompose(const PercolationSample& sample);

struct TailPoint {
  Index n = 0;
  double tail = 0;  ///< estimate of P(|C_o| >= n)
  double std_error = 0;
  Index hits = 0;
};

/// Least-squares line through (n, log tail(n)) over tail points with enough hits.
struct DecayFit {
  bool valid = false;
  double tau = 0;  ///< negative slope
  double intercept = 0;
  double r2 = 0;
  Index n_min = 0;
  Index n_max = 0;
  Index points = 0;
};

struct ClusterStats {
  Index samples = 0;
  std::vector<TailPoint> tail;
  DecayFit tau_fit;
  double clusters_per_vertex = 0;
  double clusters_per_vertex_stderr = 0;
  double deleted_density = 0;
  double deleted_density_stderr = 0;
  double origin_boundary_fraction = 0;  ///< diagnostic: origin cluster reached the window edge
};

inline constexpr Index kMinTailHits = 30;

ClusterStats cluster_stats(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                           Index n_samples, std::span<const Index> tail_grid, int workers = 1);

/// Deleted-vertex density of the infinite-volume model: 1-p (site), (1-p)^k (bond).
double deleted_density_expected(const PercolationModel& model, int degree);

/// P(origin cluster reaches the inner vertex boundary of the window).
double origin_crossing_probability(const PercolationModel& model, std::shared_ptr<const CayleyPatch> window,
                                   Index n_samples, int workers = 1);

/// Monte Carlo bracket [lower, upper] for p_c: p counts as subcritical when the
/// crossing probability of B(2R) is below half that of B(R).
struct CriticalBracket {
  double lower = 0;
  double upper = 1;
  /// Largest p treated as safely subcritical.
  double subcritical_limit() const noexcept { return 0.8 * lower; }
};

CriticalBracket bracket_critical_p(PercolationKind kind, const GroupSpec& spec, int radius, Index n_samples,
                                   std::uint64_t seed, int iterations = 8, int workers = 1);

/// "# model=<site|bond> p=<p> seed=<s> index=<i>" then open item indices.
void write_sample(std::ostream& out, const PercolationSample& sample);
/// CSV with columns n,tail,stderr.
void write_tail_csv(std::ostream& out, const ClusterStats& stats);

}  // namespace percospec
