#include "percospec/experiments.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "percospec/digest.hpp"
#include "percospec/format.hpp"
#include "percospec/parallel.hpp"

#ifndef PERCOSPEC_VERSION
#define PERCOSPEC_VERSION "0.0.0"
#endif

namespace percospec {

using nlohmann::json;
namespace fs = std::filesystem;

std::string code_version() { return PERCOSPEC_VERSION; }

json to_json(const ExponentFit& fit) {
  return {{"kind", to_string(fit.kind)},     {"slope", fit.slope},
          {"intercept", fit.intercept},      {"stderr", fit.std_error},
          {"r2", fit.r2},                    {"range", {fit.range_min, fit.range_max}},
          {"n_points", fit.n_points},        {"range_shrunk", fit.range_shrunk},
          {"inputs_digest", fit.inputs_digest}};
}

json to_json(const GrowthFit& fit) {
  return {{"classification", to_string(fit.classification)},
          {"local_ratio", fit.local_ratio},
          {"polynomial", to_json(fit.polynomial)},
          {"exponential", to_json(fit.exponential)}};
}

namespace {

json members_json(const std::vector<BoundMember>& members) {
  json out = json::array();
  for (const auto& m : members) out.push_back({{"n", m.n}, {"size", m.size}, {"lambda", m.lambda}, {"bound", m.bound}});
  return out;
}

}  // namespace

json to_json(const BoundFit& fit) {
  return {{"family", fit.family},
          {"constants", {{fit.constant_name, fit.constant}}},
          {"fit_range", {fit.fit_min, fit.fit_max}},
          {"violations", fit.violations},
          {"held_out_violations", fit.held_out_violations},
          {"per_member", members_json(fit.per_member)},
          {"held_out", members_json(fit.held_out)}};
}

json to_json(const TetrahedronReport& r) {
  return {{"modulus", r.modulus},
          {"depth", r.depth},
          {"vertices", r.vertices},
          {"expected_vertices", r.expected_vertices},
          {"target_eigenvalue", r.target},
          {"eigen_distance", r.eigen_distance},
          {"multiplicity", r.multiplicity},
          {"boundary_size", r.boundary_size},
          {"boundary_ratio", r.boundary_ratio},
          {"lowest_eigenvalue", r.lowest_eigenvalue},
          {"passed", r.passed}};
}

json to_json(const SandwichReport& r) {
  return {{"a", r.a},
          {"b", r.b},
          {"range", {r.E_min, r.E_max}},
          {"upper_violations", r.upper_violations},
          {"lower_violations", r.lower_violations},
          {"empty_measure", r.empty_measure},
          {"consistent", r.consistent},
          {"n_points", r.points.size()}};
}

namespace {

class Artifacts {
 public:
  Artifacts(fs::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    result_.files.push_back(name);
  }

  void write_json(const std::string& name, const json& value) { write(name, value.dump(2) + "\n"); }

 private:
  fs::path dir_;
  RunResult& result_;
};

std::vector<double> default_grid(const ExperimentConfig& cfg, int degree, Index count = 50) {
  if (!cfg.spectra.energies.empty()) return cfg.spectra.energies;
  return energy_grid(0.0, 2.0 * degree, count, false);
}

/// Vertex budget for one bound family: grow n until V(n) exceeds `size`.
GrowthProfile profile_covering(const GroupSpec& spec, int start, Index size) {
  int n = std::max(start, 4);
  while (true) {
    GrowthProfile profile = growth_profile(spec, n);
    if (profile.volume.back() > size) return profile;
    n *= 2;
  }
}

// --- growth ---------------------------------------------------------------

void run_growth(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  const GroupSpec spec = cfg.require_group().spec();
  const int n_max = cfg.fits.growth_n_max ? *cfg.fits.growth_n_max : cfg.require_radius();
  const GrowthProfile profile = growth_profile(spec, n_max);
  const GrowthFit fit = cfg.fits.growth_range ? fit_growth(profile, cfg.fits.growth_range->first,
                                                           cfg.fits.growth_range->second)
                                              : fit_growth(profile);
  std::ostringstream csv;
  csv << "n,volume\n";
  for (std::size_t n = 0; n < profile.volume.size(); ++n) csv << n << ',' << profile.volume[n] << '\n';
  out.write("growth.csv", csv.str());
  summary = to_json(fit);
  summary["group"] = spec.name();
  out.write_json("growth_fit.json", summary);
}

// --- percolate ------------------------------------------------------------

void run_percolate(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  const GroupSpec spec = cfg.require_group().spec();
  const auto& pc = cfg.require_percolation();
  const PercolationModel model = cfg.model();
  auto window = std::make_shared<const CayleyBall>(enumerate_ball(spec, cfg.require_radius()));
  std::vector<Index> grid = pc.tail_grid;
  if (grid.empty())
    for (Index n = 1; n <= 20; ++n) grid.push_back(n);
  const ClusterStats stats = cluster_stats(model, window, pc.n_samples, grid, cfg.workers);
  std::ostringstream csv;
  write_tail_csv(csv, stats);
  out.write("tail.csv", csv.str());

  summary = {{"group", spec.name()},
             {"model", to_string(model.kind)},
             {"p", model.p},
             {"radius", *cfg.window.radius},
             {"samples", stats.samples},
             {"clusters_per_vertex", stats.clusters_per_vertex},
             {"clusters_per_vertex_stderr", stats.clusters_per_vertex_stderr},
             {"deleted_density", stats.deleted_density},
             {"deleted_density_stderr", stats.deleted_density_stderr},
             {"deleted_density_expected", deleted_density_expected(model, spec.degree())},
             {"origin_boundary_fraction", stats.origin_boundary_fraction},
             {"tau_fit",
              {{"valid", stats.tau_fit.valid},
               {"tau", stats.tau_fit.tau},
               {"intercept", stats.tau_fit.intercept},
               {"r2", stats.tau_fit.r2},
               {"range", {stats.tau_fit.n_min, stats.tau_fit.n_max}},
               {"points", stats.tau_fit.points}}}};
  if (pc.critical_bracket) {
    const CriticalBracket b =
        bracket_critical_p(model.kind, spec, pc.bracket_radius, pc.bracket_samples, cfg.seed, 8, cfg.workers);
    summary["critical_bracket"] = {{"lower", b.lower}, {"upper", b.upper}, {"subcritical_limit", b.subcritical_limit()}};
  }
  out.write_json("clusters.json", summary);
}

// --- ids ------------------------------------------------------------------

IDSEstimate ids_for(const ExperimentConfig& cfg, const GroupSpec& spec, BoundaryCondition bc,
                    const std::vector<double>& energies) {
  IdsOptions options{cfg.spectra.n_samples, energies, cfg.workers, true};
  if (cfg.window.depth) {
    if (spec.kind() != GroupKind::Lamplighter || !spec.default_generators())
      throw ConfigError("window.depth (tetrahedron windows) needs the lamplighter group with S_0");
    const auto tetra = tetrahedron_elements(spec.modulus(), *cfg.window.depth);
    auto host = std::make_shared<const CayleyPatch>(spec, thicken(spec, tetra, 1));
    std::vector<Index> window(tetra.size());
    for (std::size_t v = 0; v < window.size(); ++v) window[v] = static_cast<Index>(v);
    IDSEstimate ids = empirical_ids(cfg.model(), bc, host, window, options);
    ids.radius = *cfg.window.depth;
    return ids;
  }
  return empirical_ids(spec, cfg.model(), bc, cfg.require_radius(), options);
}

void run_ids(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  const GroupSpec spec = cfg.require_group().spec();
  const std::vector<double> energies = default_grid(cfg, spec.degree());
  summary = {{"group", spec.name()}, {"model", to_string(cfg.model().kind)}, {"p", cfg.model().p}};
  for (BoundaryCondition bc : cfg.spectra.bcs) {
    const IDSEstimate ids = ids_for(cfg, spec, bc, energies);
    std::ostringstream csv, bracket;
    write_ids_csv(csv, ids);
    out.write("ids_" + to_string(bc) + ".csv", csv.str());
    bracket << "E,dirichlet_side,mean,neumann_side\n";
    for (std::size_t j = 0; j < energies.size(); ++j)
      bracket << format_double(energies[j]) << ',' << format_double(ids.bracket_dirichlet[j]) << ','
              << format_double(ids.mean[j]) << ',' << format_double(ids.bracket_neumann[j]) << '\n';
    out.write("ids_bracket_" + to_string(bc) + ".csv", bracket.str());
    summary["bc"][to_string(bc)] = {{"n_at_zero", ids.n_at_zero},
                                    {"n_at_zero_stderr", ids.n_at_zero_stderr},
                                    {"window_size", ids.window_size},
                                    {"n_samples", ids.n_samples}};
  }
  out.write_json("ids.json", summary);
}

// --- free-ids -------------------------------------------------------------

void run_free_ids(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  const GroupSpec spec = cfg.require_group().spec();
  const auto [e_min, e_max] = cfg.fits.energy_range;
  const std::vector<double> energies =
      cfg.spectra.energies.empty() ? energy_grid(e_min, e_max, 25, true) : cfg.spectra.energies;
  summary = {{"group", spec.name()}};
  const bool lattice = spec.kind() == GroupKind::FreeAbelian && spec.default_generators() && spec.rank() <= 4;
  if (lattice) {
    std::ostringstream csv;
    csv << "E,value,error,method,clamped\n";
    std::vector<double> values;
    for (double E : energies) {
      const FreeIdsValue v = free_ids_zd(spec.rank(), E, cfg.spectra.mc_samples, cfg.seed);
      values.push_back(v.value);
      csv << format_double(E) << ',' << format_double(v.value) << ',' << format_double(v.error) << ',' << v.method
          << ',' << (v.clamped ? 1 : 0) << '\n';
    }
    out.write("free_ids.csv", csv.str());
    try {
      summary["van_hove"] = to_json(fit_van_hove(energies, values, e_min, e_max));
    } catch (const DegenerateError& e) {
      summary["van_hove"] = {{"error", e.what()}};
    }
  }
  if (cfg.window.radius || !lattice) {
    const FreeIdsTrace trace = free_ids_ball(spec, cfg.require_radius(), energies, cfg.spectra.ball_radii);
    std::ostringstream csv;
    csv << "E";
    for (int r : trace.radii) csv << ",radius_" << r;
    csv << '\n';
    for (std::size_t j = 0; j < energies.size(); ++j) {
      csv << format_double(energies[j]);
      for (const auto& row : trace.values) csv << ',' << format_double(row[j]);
      csv << '\n';
    }
    out.write("free_ids_ball.csv", csv.str());
    summary["ball_radii"] = trace.radii;
    try {
      summary["van_hove_ball"] = to_json(fit_van_hove(energies, trace.final_values(), e_min, e_max));
    } catch (const DegenerateError& e) {
      summary["van_hove_ball"] = {{"error", e.what()}};
    }
  }
  out.write_json("free_ids.json", summary);
}

// --- bounds ---------------------------------------------------------------

void bound_rows(std::ostringstream& csv, const std::string& check, const BoundFit& fit) {
  for (const auto& m : fit.per_member)
    csv << check << ',' << m.n << ',' << m.size << ',' << format_double(m.lambda) << ',' << format_double(m.bound)
        << ",0\n";
  for (const auto& m : fit.held_out)
    csv << check << ',' << m.n << ',' << m.size << ',' << format_double(m.lambda) << ',' << format_double(m.bound)
        << ",1\n";
}

std::vector<TetrahedronReport> tetrahedron_suite(const std::vector<int>& moduli, const std::vector<int>& depths,
                                                 Artifacts& out) {
  std::vector<TetrahedronReport> reports;
  std::ostringstream csv;
  csv << "m,n,vertices,expected_vertices,target,eigen_distance,multiplicity,boundary_ratio,lowest,passed\n";
  for (int m : moduli) {
    for (int n : depths) {
      const TetrahedronReport r = tetrahedron_report(m, n);
      csv << m << ',' << n << ',' << r.vertices << ',' << r.expected_vertices << ',' << format_double(r.target)
          << ',' << format_double(r.eigen_distance) << ',' << r.multiplicity << ','
          << format_double(r.boundary_ratio) << ',' << format_double(r.lowest_eigenvalue) << ','
          << (r.passed ? 1 : 0) << '\n';
      reports.push_back(r);
    }
  }
  out.write("tetrahedra.csv", csv.str());
  return reports;
}

void raise_failed_tetrahedra(const std::vector<TetrahedronReport>& reports) {
  for (const auto& r : reports)
    if (!r.passed) (void)tetrahedron_checks(r.modulus, r.depth);
}

void run_bounds(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  const GroupSpec spec = cfg.require_group().spec();
  const auto& bc = cfg.bounds;
  const auto [b_lo, b_hi] = bc.ball_radii;
  const auto [l_lo, l_hi] = bc.line_lengths;

  const auto balls = ball_family(spec, b_lo, b_hi);
  const auto lines = line_family(spec, l_lo, l_hi);
  std::vector<FamilyMember> held_balls, held_lines;
  if (bc.held_out) {
    held_balls = ball_family(spec, b_hi + 1, b_hi + 2);
    held_lines = line_family(spec, l_hi + 1, 2 * l_hi);
  }
  const Index largest = std::max(held_balls.empty() ? balls.back().subgraph.size() : held_balls.back().subgraph.size(),
                                 static_cast<Index>(bc.held_out ? 2 * l_hi : l_hi));
  const GrowthProfile growth = profile_covering(spec, b_hi + 3, largest);

  std::ostringstream csv;
  csv << "check,n,size,lambda,bound,held_out\n";
  summary = {{"group", spec.name()}};
  auto record = [&](const std::string& name, const BoundFit& fit) {
    summary["checks"][name] = to_json(fit);
    bound_rows(csv, name, fit);
  };
  record("adjacency_lower_balls", lower_bound_check_adjacency(balls, growth, held_balls, "balls " + spec.name()));
  record("adjacency_lower_lines", lower_bound_check_adjacency(lines, growth, held_lines, "lines " + spec.name()));
  std::vector<FamilyMember> neumann_balls;
  for (const auto& m : balls)
    if (m.subgraph.size() >= 2) neumann_balls.push_back(m);
  std::vector<FamilyMember> neumann_lines;
  for (const auto& m : lines)
    if (m.subgraph.size() >= 2) neumann_lines.push_back(m);
  if (!neumann_balls.empty())
    record("neumann_lower_balls", lower_bound_check_neumann(neumann_balls, held_balls, "balls " + spec.name()));
  if (!neumann_lines.empty())
    record("neumann_lower_lines", lower_bound_check_neumann(neumann_lines, held_lines, "lines " + spec.name()));
  record("dirichlet_upper_balls", upper_bound_check_dirichlet(spec, bc.dirichlet_radii.first, bc.dirichlet_radii.second));
  record("neumann_upper_lines", upper_bound_check_neumann(spec, bc.neumann_lines.first, bc.neumann_lines.second));
  out.write("bounds.csv", csv.str());

  std::vector<TetrahedronReport> reports;
  if (spec.kind() == GroupKind::Lamplighter) {
    reports = tetrahedron_suite({spec.modulus()}, cfg.lamplighter.depths, out);
    for (const auto& r : reports) summary["tetrahedra"].push_back(to_json(r));
  }
  out.write_json("bounds.json", summary);
  raise_failed_tetrahedra(reports);
}

// --- exponents ------------------------------------------------------------

void run_exponents(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  const GroupSpec spec = cfg.require_group().spec();
  summary = {{"group", spec.name()}};

  if (cfg.fits.growth_n_max) {
    const GrowthProfile profile = growth_profile(spec, *cfg.fits.growth_n_max);
    summary["growth"] = to_json(cfg.fits.growth_range
                                    ? fit_growth(profile, cfg.fits.growth_range->first, cfg.fits.growth_range->second)
                                    : fit_growth(profile));
  }

  const bool lattice = spec.kind() == GroupKind::FreeAbelian && spec.default_generators() && spec.rank() <= 4;
  if (lattice) {
    const auto [lo, hi] = cfg.fits.energy_range;
    const std::vector<double> grid = energy_grid(lo, hi, 25, true);
    std::vector<double> values;
    for (double E : grid) values.push_back(free_ids_zd(spec.rank(), E, cfg.spectra.mc_samples, cfg.seed).value);
    try {
      summary["van_hove"] = to_json(fit_van_hove(grid, values, lo, hi));
    } catch (const DegenerateError& e) {
      summary["van_hove"] = {{"error", e.what()}};
    }
  }

  if (!cfg.percolation) {
    out.write_json("exponents.json", summary);
    return;
  }
  const PercolationModel model = cfg.model();
  const auto [l_lo, l_hi] = cfg.fits.lifshitz_range;
  const bool exact = spec.kind() == GroupKind::FreeAbelian && spec.rank() == 1 && spec.default_generators() &&
                     model.kind == PercolationKind::Site;
  std::vector<double> grid = cfg.spectra.energies.empty() ? energy_grid(l_lo, l_hi, 40, true) : cfg.spectra.energies;
  summary["lifshitz_source"] = exact ? "exact_z1_oracle" : "monte_carlo";

  std::ostringstream csv;
  csv << "E,bc,N,stderr\n";
  std::map<BoundaryCondition, std::pair<std::vector<double>, double>> curves;
  for (BoundaryCondition bc : cfg.spectra.bcs) {
    std::vector<double> values, errors;
    double shift = 0;
    if (exact) {
      values = z1_site_exact_ids(bc, model.p, grid, cfg.spectra.s_max);
      errors.assign(values.size(), 0.0);
      if (bc == BoundaryCondition::Neumann) {
        const double zero = 0.0;
        shift = z1_site_exact_ids(bc, model.p, std::span<const double>(&zero, 1), cfg.spectra.s_max)[0];
      }
    } else {
      const IDSEstimate ids = ids_for(cfg, spec, bc, grid);
      values = ids.mean;
      errors = ids.std_error;
      if (bc == BoundaryCondition::Neumann) shift = ids.n_at_zero;
    }
    for (std::size_t j = 0; j < grid.size(); ++j)
      csv << format_double(grid[j]) << ',' << to_string(bc) << ',' << format_double(values[j]) << ','
          << format_double(errors[j]) << '\n';
    json entry = {{"shift", shift}};
    try {
      entry["lifshitz"] = to_json(fit_lifshitz(grid, values, exact ? std::span<const double>{} : errors, shift, l_lo, l_hi));
    } catch (const DegenerateError& e) {
      entry["lifshitz"] = {{"error", e.what()}};
    }
    summary["bc"][to_string(bc)] = entry;
    curves[bc] = {values, shift};
  }
  out.write("exponents_ids.csv", csv.str());

  if (const auto it = curves.find(BoundaryCondition::Neumann); it != curves.end()) {
    const auto [n_lo, n_hi] = cfg.bounds.neumann_lines;
    const auto lines = line_family(spec, n_lo, n_hi);
    std::vector<double> c;
    for (const auto& m : lines) c.push_back(2.0 * (1.0 - std::cos(std::numbers::pi / static_cast<double>(m.n))));
    const SandwichInputs inputs = sandwich_inputs(lines, c, BoundaryCondition::Neumann);
    const double alpha = lower_bound_check_neumann(lines).constant;
    const auto f_inverse = [alpha](double E) { return std::sqrt(alpha / E); };
    const SandwichReport report = sandwich_check(grid, it->second.first, it->second.second, f_inverse, inputs, l_lo, l_hi);
    json sandwich = to_json(report);
    sandwich["alpha_N"] = alpha;
    summary["sandwich"] = sandwich;
    std::ostringstream scsv;
    scsv << "E,excess,upper,lower,n_of_E\n";
    for (const auto& p : report.points)
      scsv << format_double(p.E) << ',' << format_double(p.excess) << ',' << format_double(p.upper) << ','
           << format_double(p.lower) << ',' << p.n_of_E << '\n';
    out.write("sandwich.csv", scsv.str());
  }
  out.write_json("exponents.json", summary);
}

// --- chain ----------------------------------------------------------------

void run_chain(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  const GroupSpec spec = cfg.require_group().spec();
  const PercolationModel model = cfg.model();
  if (model.kind != PercolationKind::Site) throw ConfigError("chain: the operator chain is defined for site percolation");
  const int radius = cfg.require_radius();
  const std::vector<double> energies = default_grid(cfg, spec.degree());
  const std::vector<double>& lambdas = cfg.spectra.lambdas;
  const Index samples = cfg.spectra.n_samples;

  auto host = std::make_shared<const CayleyBall>(enumerate_ball(spec, radius + 1));
  std::vector<Index> window(static_cast<std::size_t>(host->volumes()[radius]));
  for (std::size_t v = 0; v < window.size(); ++v) window[v] = static_cast<Index>(v);
  const double volume = static_cast<double>(window.size());
  const LabeledOperator free_op = restrict(free_laplacian(*host), window);
  const std::vector<Index> free_counts = count_below(free_op, energies);
  const Eigen::VectorXd free_eigs = eigenvalues_dense(free_op, cfg.spectra.dense_cap).eigenvalues;

  // Columns: tilde Neumann, free, BA per lambda, adjacency, Dirichlet.
  const std::size_t columns = 4 + lambdas.size();
  struct SampleResult {
    std::vector<std::vector<double>> n;  // [column][energy]
    Index order_violations = 0;
    Index eigen_violations = 0;
  };
  std::vector<SampleResult> results(static_cast<std::size_t>(samples));
  constexpr double slack = 1e-10;

  parallel_for(samples, cfg.workers, [&](Index i) {
    const PercolationSample s = PercolationSample::draw(model, host, i);
    SampleResult r;
    r.n.assign(columns, std::vector<double>(energies.size()));
    const LabeledOperator neumann = compressed_laplacian(s, BoundaryCondition::Neumann, window);
    const Index deleted = static_cast<Index>(window.size()) - neumann.dim();
    const std::vector<Index> tilde = count_below(neumann, energies);
    std::vector<std::vector<Index>> counts{tilde, free_counts};
    for (std::size_t j = 0; j < energies.size(); ++j) counts[0][j] += energies[j] + kCountTolerance >= 0 ? deleted : 0;
    std::vector<Eigen::VectorXd> ordered_eigs{
        eigenvalues_dense(restrict(extend(neumann, *host, 0.0), window), cfg.spectra.dense_cap).eigenvalues, free_eigs};
    for (double lambda : lambdas) {
      const LabeledOperator ba = restrict(anderson(s, lambda), window);
      counts.push_back(count_below(ba, energies));
      ordered_eigs.push_back(eigenvalues_dense(ba, cfg.spectra.dense_cap).eigenvalues);
    }
    counts.push_back(count_below(compressed_laplacian(s, BoundaryCondition::Adjacency, window), energies));
    counts.push_back(count_below(compressed_laplacian(s, BoundaryCondition::Dirichlet, window), energies));
    for (std::size_t c = 0; c < columns; ++c)
      for (std::size_t j = 0; j < energies.size(); ++j) r.n[c][j] = static_cast<double>(counts[c][j]) / volume;
    for (std::size_t c = 0; c + 1 < columns; ++c)
      for (std::size_t j = 0; j < energies.size(); ++j) r.order_violations += counts[c][j] < counts[c + 1][j];
    for (std::size_t c = 0; c + 1 < ordered_eigs.size(); ++c)
      r.eigen_violations += (ordered_eigs[c].array() > ordered_eigs[c + 1].array() + slack).count();
    results[i] = std::move(r);
  });

  std::vector<std::vector<double>> mean(columns, std::vector<double>(energies.size(), 0.0));
  auto se = mean;
  Index order_violations = 0, eigen_violations = 0;
  const double n = static_cast<double>(samples);
  for (const auto& r : results) {
    order_violations += r.order_violations;
    eigen_violations += r.eigen_violations;
    for (std::size_t c = 0; c < columns; ++c)
      for (std::size_t j = 0; j < energies.size(); ++j) {
        mean[c][j] += r.n[c][j];
        se[c][j] += r.n[c][j] * r.n[c][j];
      }
  }
  for (std::size_t c = 0; c < columns; ++c)
    for (std::size_t j = 0; j < energies.size(); ++j) {
      mean[c][j] /= n;
      se[c][j] = std::sqrt(std::max(0.0, se[c][j] / n - mean[c][j] * mean[c][j]) / (n - 1));
    }
  Index mean_violations = 0;
  for (std::size_t c = 0; c + 1 < columns; ++c)
    for (std::size_t j = 0; j < energies.size(); ++j)
      mean_violations += mean[c][j] - mean[c + 1][j] < -3.0 * std::hypot(se[c][j], se[c + 1][j]);

  std::vector<std::string> names{"tilde_neumann", "free"};
  for (double lambda : lambdas) names.push_back("ba_" + format_double(lambda));
  names.push_back("adjacency");
  names.push_back("dirichlet");
  std::ostringstream csv, err;
  csv << "E";
  err << "E";
  for (const auto& name : names) {
    csv << ',' << name;
    err << ',' << name;
  }
  csv << '\n';
  err << '\n';
  for (std::size_t j = 0; j < energies.size(); ++j) {
    csv << format_double(energies[j]);
    err << format_double(energies[j]);
    for (std::size_t c = 0; c < columns; ++c) {
      csv << ',' << format_double(mean[c][j]);
      err << ',' << format_double(se[c][j]);
    }
    csv << '\n';
    err << '\n';
  }
  out.write("chain.csv", csv.str());
  out.write("chain_stderr.csv", err.str());
  summary = {{"group", spec.name()},
             {"p", model.p},
             {"radius", radius},
             {"n_samples", samples},
             {"columns", names},
             {"per_sample_order_violations", order_violations},
             {"eigenvalue_order_violations", eigen_violations},
             {"mean_violations_3sigma", mean_violations}};
  out.write_json("chain.json", summary);
  if (order_violations > 0 || eigen_violations > 0)
    throw OracleViolation("operator chain violated: " + std::to_string(order_violations) + " count and " +
                          std::to_string(eigen_violations) + " eigenvalue violations");
}

// --- lamplighter ----------------------------------------------------------

void run_lamplighter(const ExperimentConfig& cfg, Artifacts& out, json& summary) {
  std::vector<int> moduli = cfg.lamplighter.moduli;
  if (cfg.group) {
    const GroupSpec spec = cfg.group->spec();
    if (spec.kind() != GroupKind::Lamplighter) throw ConfigError("lamplighter: group must be a lamplighter group");
    moduli = {spec.modulus()};
  }
  const std::vector<TetrahedronReport> reports = tetrahedron_suite(moduli, cfg.lamplighter.depths, out);
  for (const auto& r : reports) summary["tetrahedra"].push_back(to_json(r));

  std::ostringstream csv;
  csv << "m,n,steps,value,neg_log\n";
  Index exact_failures = 0;
  for (int m : moduli) {
    std::vector<double> neg_log;
    double mu2 = 0;
    for (int n = 1; n <= cfg.lamplighter.return_steps; ++n) {
      const ReturnProbability rp = return_probability(GroupSpec::lamplighter(m), n);
      if (n == 1) mu2 = rp.value;
      neg_log.push_back(-std::log(rp.value));
      csv << m << ',' << n << ',' << rp.steps << ',' << format_double(rp.value) << ','
          << format_double(neg_log.back()) << '\n';
      if (n == 1 && std::abs(rp.value - 1.0 / (2.0 * m)) > 1e-15) ++exact_failures;
    }
    // mu^(2n) = |P^n delta|^2 is log-convex in n, so neg_log is always concave.
    bool increasing = true, convex = true, concave = true;
    for (std::size_t i = 1; i < neg_log.size(); ++i) increasing = increasing && neg_log[i] > neg_log[i - 1];
    for (std::size_t i = 2; i < neg_log.size(); ++i) {
      const double second = neg_log[i] - 2 * neg_log[i - 1] + neg_log[i - 2];
      convex = convex && second >= -1e-12;
      concave = concave && second <= 1e-12;
    }
    summary["return_probability"][std::to_string(m)] = {
        {"mu2", mu2}, {"mu2_expected", 1.0 / (2.0 * m)}, {"increasing", increasing},
        {"convex", convex}, {"concave", concave}};
  }
  out.write("return_probability.csv", csv.str());
  out.write_json("lamplighter.json", summary);
  raise_failed_tetrahedra(reports);
  if (exact_failures > 0) throw OracleViolation("two-step return probability differs from 1/(2m)");
}

using Runner = std::function<void(const ExperimentConfig&, Artifacts&, json&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"growth", run_growth},   {"percolate", run_percolate}, {"ids", run_ids},     {"free-ids", run_free_ids},
      {"bounds", run_bounds},   {"exponents", run_exponents}, {"chain", run_chain}, {"lamplighter", run_lamplighter}};
  return table;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"growth", "percolate", "ids",   "free-ids",
                                              "bounds", "exponents", "chain", "lamplighter"};
  return names;
}

void run_experiment(const std::string& subcommand, const ExperimentConfig& config, const fs::path& out_dir,
                    RunResult& result) {
  const auto it = runners().find(subcommand);
  if (it == runners().end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  Artifacts artifacts(out_dir, result);
  it->second(config, artifacts, result.summary);
}

RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& config, const fs::path& out_dir) {
  RunResult result;
  run_experiment(subcommand, config, out_dir, result);
  return result;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand, const ExperimentConfig& config,
                    const RunResult& result, double wall_seconds, int exit_code, const std::string& message) {
  json files = json::object();
  for (const auto& name : result.files) {
    std::ifstream in(out_dir / name, std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    files[name] = hex_digest(bytes.str());
  }
  const json manifest{{"subcommand", subcommand},
                      {"config_digest", config.digest()},
                      {"code_version", code_version()},
                      {"seed", config.seed},
                      {"workers", config.workers},
                      {"budget_vertices", default_vertex_budget()},
                      {"wall_time_seconds", wall_seconds},
                      {"exit_code", exit_code},
                      {"message", message},
                      {"files", files}};
  fs::create_directories(out_dir);
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
}

int exit_code_for(const std::exception_ptr& error) noexcept {
  if (!error) return 0;
  try {
    std::rethrow_exception(error);
  } catch (const OracleViolation&) {
    return 3;
  } catch (const ResourceError&) {
    return 2;
  } catch (const DomainError&) {
    return 1;
  } catch (const nlohmann::json::exception&) {
    return 1;
  } catch (...) {
    return 4;
  }
}

}  // namespace percospec
