#include "percospec/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "percospec/digest.hpp"

namespace percospec {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!names.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

std::string path(const std::string& where, const std::string& key) { return where + "." + key; }

long long as_int(const json& v, const std::string& at, long long lo, long long hi) {
  if (!v.is_number_integer()) throw ConfigError(at + ": expected an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) throw ConfigError(at + ": value " + std::to_string(x) + " out of range");
  return x;
}

double as_number(const json& v, const std::string& at, double lo, double hi) {
  if (!v.is_number()) throw ConfigError(at + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || x > hi) throw ConfigError(at + ": value out of range");
  return x;
}

std::string as_string(const json& v, const std::string& at) {
  if (!v.is_string()) throw ConfigError(at + ": expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& at) {
  if (!v.is_boolean()) throw ConfigError(at + ": expected a boolean");
  return v.get<bool>();
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

template <typename T, typename Convert>
std::vector<T> as_array(const json& v, const std::string& at, Convert convert, bool allow_empty = false) {
  if (!v.is_array()) throw ConfigError(at + ": expected an array");
  if (v.empty() && !allow_empty) throw ConfigError(at + ": array must not be empty");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], at + "[" + std::to_string(i) + "]"));
  return out;
}

std::pair<int, int> as_int_range(const json& v, const std::string& at, int lo) {
  const auto xs = as_array<int>(v, at, [lo](const json& e, const std::string& a) {
    return static_cast<int>(as_int(e, a, lo, 1'000'000));
  });
  if (xs.size() != 2 || xs[0] > xs[1]) throw ConfigError(at + ": expected [min, max] with min <= max");
  return {xs[0], xs[1]};
}

std::pair<double, double> as_number_range(const json& v, const std::string& at) {
  const auto xs = as_array<double>(v, at, [](const json& e, const std::string& a) {
    return as_number(e, a, -1e300, 1e300);
  });
  if (xs.size() != 2 || !(xs[0] < xs[1])) throw ConfigError(at + ": expected [min, max] with min < max");
  return {xs[0], xs[1]};
}

GroupConfig parse_group(const json& obj) {
  const std::string where = "group";
  check_keys(obj, where, {"kind", "rank", "modulus", "generators"});
  const json* kind = find(obj, "kind");
  if (!kind) throw ConfigError("group.kind is required");
  GroupConfig g;
  g.kind = as_string(*kind, "group.kind");
  if (g.kind != "free_abelian" && g.kind != "heisenberg" && g.kind != "lamplighter")
    throw ConfigError("group.kind must be free_abelian, heisenberg or lamplighter");
  if (const json* v = find(obj, "rank")) {
    if (g.kind != "free_abelian") throw ConfigError("group.rank applies to free_abelian only");
    g.rank = static_cast<int>(as_int(*v, "group.rank", 1, 8));
  }
  if (const json* v = find(obj, "modulus")) {
    if (g.kind != "lamplighter") throw ConfigError("group.modulus applies to lamplighter only");
    g.modulus = static_cast<int>(as_int(*v, "group.modulus", 2, 64));
  }
  if (const json* v = find(obj, "generators")) {
    g.generators = as_array<std::vector<int>>(*v, "group.generators", [](const json& e, const std::string& a) {
      return as_array<int>(e, a, [](const json& x, const std::string& b) {
        return static_cast<int>(as_int(x, b, std::numeric_limits<int>::min(), std::numeric_limits<int>::max()));
      });
    });
  }
  try {
    (void)g.spec();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("group: ") + e.what());
  }
  return g;
}

PercolationConfig parse_percolation(const json& obj) {
  const std::string w = "percolation";
  check_keys(obj, w,
             {"model", "p", "n_samples", "tail_grid", "critical_bracket", "bracket_radius", "bracket_samples"});
  const json* model = find(obj, "model");
  const json* p = find(obj, "p");
  if (!model || !p) throw ConfigError("percolation.model and percolation.p are required");
  PercolationConfig c;
  const std::string name = as_string(*model, path(w, "model"));
  if (name != "site" && name != "bond") throw ConfigError("percolation.model must be site or bond");
  c.model = parse_percolation_kind(name);
  c.p = as_number(*p, path(w, "p"), 0.0, 1.0);
  if (const json* v = find(obj, "n_samples")) c.n_samples = as_int(*v, path(w, "n_samples"), 100, 100'000'000);
  if (const json* v = find(obj, "tail_grid"))
    c.tail_grid = as_array<Index>(*v, path(w, "tail_grid"), [](const json& e, const std::string& a) {
      return static_cast<Index>(as_int(e, a, 1, 1'000'000'000));
    });
  if (const json* v = find(obj, "critical_bracket")) c.critical_bracket = as_bool(*v, path(w, "critical_bracket"));
  if (const json* v = find(obj, "bracket_radius"))
    c.bracket_radius = static_cast<int>(as_int(*v, path(w, "bracket_radius"), 1, 10'000));
  if (const json* v = find(obj, "bracket_samples"))
    c.bracket_samples = as_int(*v, path(w, "bracket_samples"), 100, 100'000'000);
  return c;
}

WindowConfig parse_window(const json& obj) {
  check_keys(obj, "window", {"radius", "depth"});
  WindowConfig c;
  if (const json* v = find(obj, "radius")) c.radius = static_cast<int>(as_int(*v, "window.radius", 1, 1'000'000));
  if (const json* v = find(obj, "depth")) c.depth = static_cast<int>(as_int(*v, "window.depth", 1, 64));
  return c;
}

std::vector<double> parse_energies(const json& v, const std::string& at) {
  if (v.is_array())
    return as_array<double>(v, at, [](const json& e, const std::string& a) { return as_number(e, a, -1e6, 1e6); });
  check_keys(v, at, {"min", "max", "count", "scale"});
  const json* lo = find(v, "min");
  const json* hi = find(v, "max");
  const json* count = find(v, "count");
  if (!lo || !hi || !count) throw ConfigError(at + ": min, max and count are required");
  bool logarithmic = false;
  if (const json* s = find(v, "scale")) {
    const std::string scale = as_string(*s, at + ".scale");
    if (scale != "linear" && scale != "log") throw ConfigError(at + ".scale must be linear or log");
    logarithmic = scale == "log";
  }
  const double a = as_number(*lo, at + ".min", -1e6, 1e6);
  const double b = as_number(*hi, at + ".max", -1e6, 1e6);
  if (!(a < b) || (logarithmic && !(a > 0))) throw ConfigError(at + ": need min < max (and min > 0 for log)");
  return energy_grid(a, b, as_int(*count, at + ".count", 2, 100'000), logarithmic);
}

SpectraConfig parse_spectra(const json& obj) {
  const std::string w = "spectra";
  check_keys(obj, w, {"bc", "energies", "n_samples", "dense_cap", "lambdas", "s_max", "mc_samples", "ball_radii"});
  SpectraConfig c;
  if (const json* v = find(obj, "bc"))
    c.bcs = as_array<BoundaryCondition>(*v, path(w, "bc"), [](const json& e, const std::string& a) {
      const std::string s = as_string(e, a);
      if (s != "adjacency" && s != "dirichlet" && s != "neumann")
        throw ConfigError(a + ": must be adjacency, dirichlet or neumann");
      return parse_boundary_condition(s);
    });
  if (const json* v = find(obj, "energies")) c.energies = parse_energies(*v, path(w, "energies"));
  if (const json* v = find(obj, "n_samples")) c.n_samples = as_int(*v, path(w, "n_samples"), 10, 100'000'000);
  if (const json* v = find(obj, "dense_cap")) c.dense_cap = as_int(*v, path(w, "dense_cap"), 1, 100'000);
  if (const json* v = find(obj, "lambdas"))
    c.lambdas = as_array<double>(*v, path(w, "lambdas"), [](const json& e, const std::string& a) {
      return as_number(e, a, 0.0, 1e12);
    });
  if (const json* v = find(obj, "s_max")) c.s_max = as_int(*v, path(w, "s_max"), 1, 100'000);
  if (const json* v = find(obj, "mc_samples")) c.mc_samples = as_int(*v, path(w, "mc_samples"), 2, 1'000'000'000);
  if (const json* v = find(obj, "ball_radii"))
    c.ball_radii = as_array<int>(*v, path(w, "ball_radii"), [](const json& e, const std::string& a) {
      return static_cast<int>(as_int(e, a, 1, 1'000'000));
    });
  return c;
}

FitsConfig parse_fits(const json& obj) {
  check_keys(obj, "fits", {"growth_n_max", "growth_range", "energy_range", "lifshitz_range"});
  FitsConfig c;
  if (const json* v = find(obj, "growth_n_max"))
    c.growth_n_max = static_cast<int>(as_int(*v, "fits.growth_n_max", 4, 1'000'000));
  if (const json* v = find(obj, "growth_range")) c.growth_range = as_int_range(*v, "fits.growth_range", 1);
  if (const json* v = find(obj, "energy_range")) c.energy_range = as_number_range(*v, "fits.energy_range");
  if (const json* v = find(obj, "lifshitz_range")) c.lifshitz_range = as_number_range(*v, "fits.lifshitz_range");
  if (!(c.energy_range.first > 0) || !(c.lifshitz_range.first > 0))
    throw ConfigError("fits: energy ranges must be positive");
  return c;
}

BoundsConfig parse_bounds(const json& obj) {
  check_keys(obj, "bounds", {"ball_radii", "line_lengths", "dirichlet_radii", "neumann_lines", "held_out"});
  BoundsConfig c;
  if (const json* v = find(obj, "ball_radii")) c.ball_radii = as_int_range(*v, "bounds.ball_radii", 0);
  if (const json* v = find(obj, "line_lengths")) c.line_lengths = as_int_range(*v, "bounds.line_lengths", 1);
  if (const json* v = find(obj, "dirichlet_radii")) c.dirichlet_radii = as_int_range(*v, "bounds.dirichlet_radii", 1);
  if (const json* v = find(obj, "neumann_lines")) c.neumann_lines = as_int_range(*v, "bounds.neumann_lines", 2);
  if (const json* v = find(obj, "held_out")) c.held_out = as_bool(*v, "bounds.held_out");
  return c;
}

LamplighterConfig parse_lamplighter(const json& obj) {
  check_keys(obj, "lamplighter", {"moduli", "depths", "return_steps"});
  LamplighterConfig c;
  auto ints = [](long long lo, long long hi) {
    return [lo, hi](const json& e, const std::string& a) { return static_cast<int>(as_int(e, a, lo, hi)); };
  };
  if (const json* v = find(obj, "moduli")) c.moduli = as_array<int>(*v, "lamplighter.moduli", ints(2, 64));
  if (const json* v = find(obj, "depths")) c.depths = as_array<int>(*v, "lamplighter.depths", ints(2, 64));
  if (const json* v = find(obj, "return_steps"))
    c.return_steps = static_cast<int>(as_int(*v, "lamplighter.return_steps", 1, 1000));
  return c;
}

}  // namespace

GroupSpec GroupConfig::spec() const {
  std::vector<GroupElement> gens;
  for (const auto& code : generators) {
    GroupElement g;
    for (int x : code) g.code.push_back(x);
    gens.push_back(std::move(g));
  }
  if (kind == "free_abelian") return gens.empty() ? GroupSpec::free_abelian(rank) : GroupSpec::free_abelian(rank, gens);
  if (kind == "heisenberg") return gens.empty() ? GroupSpec::heisenberg() : GroupSpec::heisenberg(gens);
  if (kind == "lamplighter")
    return gens.empty() ? GroupSpec::lamplighter(modulus) : GroupSpec::lamplighter(modulus, gens);
  throw ConfigError("unknown group kind '" + kind + "'");
}

const GroupConfig& ExperimentConfig::require_group() const {
  if (!group) throw ConfigError("this subcommand needs a 'group' section");
  return *group;
}

const PercolationConfig& ExperimentConfig::require_percolation() const {
  if (!percolation) throw ConfigError("this subcommand needs a 'percolation' section");
  return *percolation;
}

int ExperimentConfig::require_radius() const {
  if (!window.radius) throw ConfigError("this subcommand needs window.radius");
  return *window.radius;
}

PercolationModel ExperimentConfig::model() const {
  const auto& p = require_percolation();
  return {p.model, p.p, seed};
}

std::string ExperimentConfig::digest() const {
  json numbers = effective;
  numbers.erase("workers");
  numbers.erase("output_dir");
  numbers["budget_vertices"] = default_vertex_budget();
  return hex_digest(numbers.dump());
}

std::vector<double> energy_grid(double min, double max, Index count, bool logarithmic) {
  if (count < 2) throw DomainError("energy grid needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = logarithmic ? std::exp(std::log(min) + t * (std::log(max) - std::log(min))) : min + t * (max - min);
  }
  out.front() = min;
  out.back() = max;
  return out;
}

ExperimentConfig parse_config(const json& document) {
  check_keys(document, "config",
             {"seed", "workers", "output_dir", "group", "percolation", "window", "spectra", "fits", "bounds",
              "lamplighter"});
  const json* seed = find(document, "seed");
  if (!seed) throw ConfigError("config: 'seed' is required");
  if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0))
    throw ConfigError("config.seed: expected a non-negative integer");
  ExperimentConfig c;
  c.seed = seed->get<std::uint64_t>();
  if (const json* v = find(document, "workers")) c.workers = static_cast<int>(as_int(*v, "config.workers", 1, 1024));
  if (const json* v = find(document, "output_dir")) c.output_dir = as_string(*v, "config.output_dir");
  if (const json* v = find(document, "group")) c.group = parse_group(*v);
  if (const json* v = find(document, "percolation")) c.percolation = parse_percolation(*v);
  if (const json* v = find(document, "window")) c.window = parse_window(*v);
  if (const json* v = find(document, "spectra")) c.spectra = parse_spectra(*v);
  if (const json* v = find(document, "fits")) c.fits = parse_fits(*v);
  if (const json* v = find(document, "bounds")) c.bounds = parse_bounds(*v);
  if (const json* v = find(document, "lamplighter")) c.lamplighter = parse_lamplighter(*v);
  c.effective = document;
  return c;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file + "'");
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + file + "' is not valid JSON: " + e.what());
  }
  return parse_config(document);
}

}  // namespace percospec
