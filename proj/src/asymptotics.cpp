#include "percospec/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "percospec/digest.hpp"
#include "percospec/errors.hpp"
#include "percospec/format.hpp"
#include "percospec/regression.hpp"

namespace percospec {

std::string to_string(FitKind kind) {
  switch (kind) {
    case FitKind::Growth: return "growth";
    case FitKind::VanHove: return "van_hove";
    case FitKind::Lifshitz: return "lifshitz";
    case FitKind::DoubleLog: return "double_log";
  }
  return "unknown";
}

std::string to_string(GrowthClass c) {
  switch (c) {
    case GrowthClass::Polynomial: return "polynomial";
    case GrowthClass::Superpolynomial: return "superpolynomial";
    case GrowthClass::Undetermined: return "undetermined";
  }
  return "unknown";
}

std::string series_digest(std::span<const double> x, std::span<const double> y) {
  std::string text;
  for (std::size_t i = 0; i < x.size(); ++i) text += format_double(x[i]) + ',' + format_double(y[i]) + ';';
  return hex_digest(text);
}

namespace {

ExponentFit regress(FitKind kind, const std::vector<double>& x, const std::vector<double>& y, double range_min,
                    double range_max) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto line = fit_line(Eigen::Map<const Eigen::VectorXd>(x.data(), n),
                             Eigen::Map<const Eigen::VectorXd>(y.data(), n));
  ExponentFit fit;
  fit.kind = kind;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  fit.std_error = line.slope_stderr;
  fit.range_min = range_min;
  fit.range_max = range_max;
  fit.n_points = line.points;
  fit.inputs_digest = series_digest(x, y);
  return fit;
}

double local_exponent(const std::vector<Index>& V, int n) {
  return std::log2(static_cast<double>(V[n]) / static_cast<double>(V[n / 2]));
}

/// Shared point selection for the spectral fits. `transform` maps N - shift to
/// the regression ordinate, or NaN when unusable.
template <typename Transform>
ExponentFit spectral_fit(FitKind kind, std::span<const double> energies, std::span<const double> values,
                         std::span<const double> std_error, double shift, double E_min, double E_max,
                         bool log_abscissa_abs, Transform transform) {
  if (energies.size() != values.size() || (!std_error.empty() && std_error.size() != values.size()))
    throw DomainError("fit: energies, values and errors differ in length");
  std::vector<double> x, y;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  bool dropped = false;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double E = energies[i];
    if (!(E >= E_min && E <= E_max)) continue;
    const double excess = values[i] - shift;
    double ordinate = E > 0 ? transform(excess) : std::numeric_limits<double>::quiet_NaN();
    if (!std_error.empty() && !(excess > 0 && std_error[i] / excess < 0.5))
      ordinate = std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(ordinate)) {
      dropped = true;
      continue;
    }
    x.push_back(log_abscissa_abs ? std::abs(std::log(E)) : std::log(E));
    y.push_back(ordinate);
    lo = std::min(lo, E);
    hi = std::max(hi, E);
  }
  if (x.size() < 2) throw DegenerateError("insufficient low-energy resolution");
  ExponentFit fit = regress(kind, x, y, lo, hi);
  fit.range_shrunk = dropped;
  return fit;
}

}  // namespace

GrowthFit fit_growth(const GrowthProfile& profile, int n_min, int n_max) {
  const int top = profile.n_max();
  if (top < 4) throw DomainError("fit_growth needs V(0..n) with n >= 4");
  if (n_max < 0) n_max = top;
  if (n_min < 0) n_min = std::max(1, std::min(std::max(4, n_max / 2), n_max - 2));
  if (n_min < 1 || n_max > top || n_max - n_min < 2)
    throw DomainError("fit_growth: range must hold at least 3 radii within the table");

  const auto& V = profile.volume;
  std::vector<double> log_n, n, log_v;
  for (int r = n_min; r <= n_max; ++r) {
    log_n.push_back(std::log(static_cast<double>(r)));
    n.push_back(r);
    log_v.push_back(std::log(static_cast<double>(V[r])));
  }
  GrowthFit out;
  out.polynomial = regress(FitKind::Growth, log_n, log_v, n_min, n_max);
  out.exponential = regress(FitKind::Growth, n, log_v, n_min, n_max);
  out.local_ratio = local_exponent(V, n_max) / local_exponent(V, n_max / 2);
  if (out.local_ratio <= 1.1 && out.polynomial.r2 >= 0.99)
    out.classification = GrowthClass::Polynomial;
  else if (out.local_ratio >= 1.3 && out.exponential.slope > 0)
    out.classification = GrowthClass::Superpolynomial;
  return out;
}

ExponentFit fit_van_hove(std::span<const double> energies, std::span<const double> values, double E_min,
                         double E_max) {
  return spectral_fit(FitKind::VanHove, energies, values, {}, 0.0, E_min, E_max, false, [](double v) {
    return v > 0 ? std::log(v) : std::numeric_limits<double>::quiet_NaN();
  });
}

ExponentFit fit_lifshitz(std::span<const double> energies, std::span<const double> values,
                         std::span<const double> std_error, double shift, double E_min, double E_max) {
  return spectral_fit(FitKind::Lifshitz, energies, values, std_error, shift, E_min, E_max, true, [](double v) {
    return v > 0 && v < 1 ? std::log(-std::log(v)) : std::numeric_limits<double>::quiet_NaN();
  });
}

ExponentFit fit_double_log(std::span<const double> energies, std::span<const double> values,
                           std::span<const double> std_error, double shift, double E_min, double E_max) {
  return spectral_fit(FitKind::DoubleLog, energies, values, std_error, shift, E_min, E_max, true, [](double v) {
    const double l = v > 0 ? -std::log(v) : 0.0;
    return l > 1 ? std::log(std::log(l)) : std::numeric_limits<double>::quiet_NaN();
  });
}

std::vector<double> double_log_ratio(std::span<const double> n_adjacency, std::span<const double> n_free) {
  if (n_adjacency.size() != n_free.size()) throw DomainError("double_log_ratio: lengths differ");
  std::vector<double> out(n_free.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = n_adjacency[i], f = n_free[i];
    if (!(a > 0 && a < 1 && f > 0 && f < 1)) continue;
    const double la = -std::log(a), lf = -std::log(f);
    if (la > 1 && lf > 1) out[i] = std::log(std::log(la)) / std::log(lf);
  }
  return out;
}

SandwichReport sandwich_check(std::span<const double> energies, std::span<const double> values, double shift,
                              const std::function<double(double)>& f_inverse, const SandwichInputs& inputs,
                              double E_min, double E_max) {
  if (energies.size() != values.size()) throw DomainError("sandwich_check: lengths differ");
  SandwichReport report;
  report.E_min = E_min;
  report.E_max = E_max;
  report.a = std::numeric_limits<double>::infinity();
  struct Raw {
    double E, excess, finv;
    Index n, size;
  };
  std::vector<Raw> raw;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double E = energies[i];
    if (!(E >= E_min && E <= E_max)) continue;
    const double excess = values[i] - shift;
    const Index pos = inputs.position(E);
    if (!(excess > 0 && excess < 1) || pos < 0) continue;
    const double finv = f_inverse(E);
    if (!(finv > 0)) continue;
    const double decay = -std::log(excess);
    raw.push_back({E, excess, finv, inputs.n[pos], inputs.sizes[pos]});
    report.a = std::min(report.a, decay / finv);
    report.b = std::max(report.b, decay / static_cast<double>(inputs.sizes[pos]));
  }
  if (raw.empty()) {
    report.empty_measure = true;
    report.a = 0;
    return report;
  }
  constexpr double slack = 1e-12;
  for (const auto& r : raw) {
    SandwichPoint p{r.E, r.excess, std::exp(-report.a * r.finv), std::exp(-report.b * static_cast<double>(r.size)), r.n};
    report.upper_violations += p.excess > p.upper * (1 + slack);
    report.lower_violations += p.excess < p.lower * (1 - slack);
    report.consistent = report.consistent && p.lower <= p.upper * (1 + slack);
    report.points.push_back(p);
  }
  return report;
}

}  // namespace percospec
