#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "percospec/bounds.hpp"
#include "percospec/cayley.hpp"
#include "percospec/types.hpp"

namespace percospec {

enum class FitKind { Growth, VanHove, Lifshitz, DoubleLog };

std::string to_string(FitKind kind);

/// Regression result. The fit range is in energies for spectral fits and in
/// radii for growth fits; no limit is extrapolated from it.
struct ExponentFit {
  FitKind kind = FitKind::Growth;
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  double std_error = 0;
  double range_min = 0;
  double range_max = 0;
  Index n_points = 0;
  bool range_shrunk = false;  ///< points inside the requested range were unusable and dropped
  std::string inputs_digest;
};

enum class GrowthClass { Polynomial, Superpolynomial, Undetermined };

std::string to_string(GrowthClass c);

struct GrowthFit {
  ExponentFit polynomial;   ///< log V(n) against log n
  ExponentFit exponential;  ///< log V(n) against n
  /// s(n_max) / s(n_max/2) with the local exponent s(n) = log2(V(n)/V(n/2)).
  double local_ratio = 0;
  GrowthClass classification = GrowthClass::Undetermined;
};

/// Polynomial when the local exponent is stable (ratio <= 1.1) and the log-log
/// fit has r2 >= 0.99; superpolynomial when the local exponent keeps growing
/// (ratio >= 1.3) and log V(n) has positive slope in n. Otherwise undetermined.
/// Default range [max(4, n_max/2), n_max].
GrowthFit fit_growth(const GrowthProfile& profile, int n_min = -1, int n_max = -1);

/// Slope of log N_0(E) against log E over [E_min, E_max]; nonpositive values are dropped.
ExponentFit fit_van_hove(std::span<const double> energies, std::span<const double> values, double E_min,
                         double E_max);

/// Slope of log|log(N(E) - shift)| against |log E| over [E_min, E_max]. Points
/// with N - shift outside (0, 1) or relative stderr >= 0.5 are dropped; an empty
/// range raises DegenerateError("insufficient low-energy resolution").
ExponentFit fit_lifshitz(std::span<const double> energies, std::span<const double> values,
                         std::span<const double> std_error, double shift, double E_min, double E_max);

/// Slope of log log|log(N(E) - shift)| against |log E|; needs N - shift < 1/e.
ExponentFit fit_double_log(std::span<const double> energies, std::span<const double> values,
                           std::span<const double> std_error, double shift, double E_min, double E_max);

/// ln ln|ln N_A(E)| / ln|ln N_0(E)| per energy; NaN where undefined.
std::vector<double> double_log_ratio(std::span<const double> n_adjacency, std::span<const double> n_free);

struct SandwichPoint {
  double E = 0;
  double excess = 0;  ///< N(E) - N(0)
  double upper = 0;   ///< exp(-a f^-1(E))
  double lower = 0;   ///< exp(-b |G'_{n(E)}|)
  Index n_of_E = 0;
};

struct SandwichReport {
  double a = 0;
  double b = 0;
  double E_min = 0;
  double E_max = 0;
  Index upper_violations = 0;
  Index lower_violations = 0;
  bool empty_measure = false;  ///< N(E) - N(0) vanishes on the whole range
  bool consistent = true;      ///< lower curve never above the upper curve
  std::vector<SandwichPoint> points;
};

/// Largest a and smallest b with exp(-b |G'_{n(E)}|) <= N(E) - N(0) <= exp(-a f^-1(E))
/// on the energies in [E_min, E_max] where N(E) - N(0) > 0 and n(E) exists.
SandwichReport sandwich_check(std::span<const double> energies, std::span<const double> values, double shift,
                              const std::function<double(double)>& f_inverse, const SandwichInputs& inputs,
                              double E_min, double E_max);

/// Digest of the fitted numbers, for reports.
std::string series_digest(std::span<const double> x, std::span<const double> y);

}  // namespace percospec
