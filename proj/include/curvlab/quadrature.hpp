#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curvlab {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-13;  // against a coarse estimate, so huge integrands stay cheap
  int max_depth = 40;
};

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta)) throw std::overflow_error("integrate: integrand is not finite");
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with Richardson correction
/// on each accepted panel.
template <class F>
double integrate(F&& f, double a, double b, QuadratureOptions opts = {}) {
  if (!(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0) || opts.abs_tol + opts.rel_tol == 0.0) {
    throw std::invalid_argument("integrate: tolerances must be >= 0 and not both zero");
  }
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, opts);
  // Split once up front so that integrands which vanish at the midpoint of a
  // symmetric interval cannot fool the first error estimate.
  constexpr int kPanels = 8;
  const double width = (b - a) / kPanels;
  double coarse = 0.0;
  for (int i = 0; i <= 2 * kPanels; ++i) {
    const double w = (i == 0 || i == 2 * kPanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    coarse += w * f(a + (b - a) * i / (2 * kPanels));
  }
  coarse = std::abs(coarse) * (b - a) / (6.0 * kPanels);
  if (!std::isfinite(coarse)) throw std::overflow_error("integrate: integrand is not finite");
  const double tol = std::max(opts.abs_tol, opts.rel_tol * coarse);
  if (tol == 0.0) return 0.0;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == kPanels) ? b : lo + width;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / kPanels,
                                  opts.max_depth);
  }
  return total;
}

}  // namespace curvlab
