#pragma once

#include <cmath>

#include <Eigen/Core>

#include "percospec/errors.hpp"

namespace percospec {

/// Ordinary least squares y = slope * x + intercept.
template <typename Scalar>
struct LineFit {
  Scalar slope{0};
  Scalar intercept{0};
  Scalar r2{0};
  Scalar slope_stderr{0};
  Eigen::Index points{0};
};

template <typename DerivedX, typename DerivedY>
auto fit_line(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = x.size();
  if (n != y.size()) throw DomainError("fit_line: x and y differ in length");
  if (n < 2) throw DegenerateError("fit_line: need at least two points");
  const Scalar mx = x.mean();
  const Scalar my = y.mean();
  const auto dx = (x.array() - mx).eval();
  const auto dy = (y.array() - my).eval();
  const Scalar sxx = (dx * dx).sum();
  if (sxx <= Scalar(0)) throw DegenerateError("fit_line: x values are all equal");
  LineFit<Scalar> fit;
  fit.points = n;
  fit.slope = (dx * dy).sum() / sxx;
  fit.intercept = my - fit.slope * mx;
  const Scalar syy = (dy * dy).sum();
  const Scalar sse = (dy - fit.slope * dx).square().sum();
  fit.r2 = syy > Scalar(0) ? Scalar(1) - sse / syy : Scalar(1);
  if (fit.r2 < Scalar(0)) fit.r2 = Scalar(0);
  fit.slope_stderr = n > 2 ? std::sqrt(sse / Scalar(n - 2) / sxx) : Scalar(0);
  return fit;
}

}  // namespace percospec
