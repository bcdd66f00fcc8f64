#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "percospec/cayley.hpp"
#include "percospec/errors.hpp"
#include "percospec/operators.hpp"
#include "percospec/percolation.hpp"

namespace percospec {

/// Thrown for malformed or schema-violating configuration files.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct GroupConfig {
  std::string kind;  ///< free_abelian | heisenberg | lamplighter
  int rank = 1;
  int modulus = 2;
  std::vector<std::vector<int>> generators;

  GroupSpec spec() const;
};

struct PercolationConfig {
  PercolationKind model = PercolationKind::Site;
  double p = 0.5;
  Index n_samples = 1000;
  std::vector<Index> tail_grid;
  bool critical_bracket = false;
  int bracket_radius = 8;
  Index bracket_samples = 400;
};

struct WindowConfig {
  std::optional<int> radius;
  std::optional<int> depth;
};

struct SpectraConfig {
  std::vector<BoundaryCondition> bcs{BoundaryCondition::Adjacency, BoundaryCondition::Dirichlet,
                                     BoundaryCondition::Neumann};
  std::vector<double> energies;
  Index n_samples = 100;
  Index dense_cap = 4000;
  std::vector<double> lambdas{1, 10, 100};
  Index s_max = 400;
  Index mc_samples = 400000;
  std::vector<int> ball_radii;
};

struct FitsConfig {
  std::optional<int> growth_n_max;
  std::optional<std::pair<int, int>> growth_range;
  std::pair<double, double> energy_range{1e-3, 1e-1};
  std::pair<double, double> lifshitz_range{0.005, 0.2};
};

struct BoundsConfig {
  std::pair<int, int> ball_radii{1, 8};
  std::pair<int, int> line_lengths{2, 64};
  std::pair<int, int> dirichlet_radii{1, 10};
  std::pair<int, int> neumann_lines{2, 64};
  bool held_out = true;
};

struct LamplighterConfig {
  std::vector<int> moduli{2, 3};
  std::vector<int> depths{2, 3, 4, 5};
  int return_steps = 8;
};

/// A validated experiment configuration. Unknown keys are rejected and `seed`
/// is mandatory; `effective` keeps the document as given, after CLI overrides.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir = "out";
  std::optional<GroupConfig> group;
  std::optional<PercolationConfig> percolation;
  WindowConfig window;
  SpectraConfig spectra;
  FitsConfig fits;
  BoundsConfig bounds;
  LamplighterConfig lamplighter;
  nlohmann::json effective;

  const GroupConfig& require_group() const;
  const PercolationConfig& require_percolation() const;
  int require_radius() const;
  PercolationModel model() const;

  /// Digest of every input that affects numbers (workers and output_dir excluded,
  /// vertex budget included).
  std::string digest() const;
};

ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig load_config(const std::string& path);

/// Linear or geometric energy grid from {"min", "max", "count", "scale"}.
std::vector<double> energy_grid(double min, double max, Index count, bool logarithmic);

}  // namespace percospec
