#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "equicalib/error.hpp"

namespace equicalib::numeric {

/// Pairwise (tree) summation. The reduction order depends only on the length,
/// so results are reproducible regardless of how callers partition work.
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kLeaf = 16;
  if (xs.size() <= kLeaf) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw UsageError("normal_quantile: u must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth, int& evals) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    throw NumericError("adaptive Simpson quadrature did not converge (tol " +
                       std::to_string(tol) + ")");
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals);
}

} // namespace detail

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance `tol`.
/// The interval is first split into `panels` equal pieces so that narrow
/// features (e.g. a truncated normal with small sigma) are not skipped by the
/// initial five-point estimate.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-9, int max_depth = 48,
                        int panels = 16) {
  if (b < a) return -adaptive_simpson(f, b, a, tol, max_depth, panels);
  if (b == a) return 0.0;
  int evals = 0;
  double total = 0.0;
  const double width = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + width * i;
    const double hi = (i + 1 == panels) ? b : lo + width;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / panels, max_depth, evals);
  }
  return total;
}

inline bool close(double a, double b, double abs_tol, double rel_tol = 0.0) {
  return std::abs(a - b) <= abs_tol + rel_tol * std::max(std::abs(a), std::abs(b));
}

} // namespace equicalib::numeric
