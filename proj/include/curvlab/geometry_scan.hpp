#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/coefficients.hpp"
#include "curvlab/curvature.hpp"
#include "curvlab/report.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/space1d.hpp"

namespace curvlab {

namespace detail {

inline void check_in_f_domain(const CurvatureParams& params, double r, const char* where) {
  if (r > conjugate_radius(params)) {
    throw std::domain_error(std::string(where) + ": radius past the conjugate radius");
  }
}

}  // namespace detail

/// r -> m(B_r(x0)) / F(r) must be nonincreasing. The reported margin is the
/// largest relative increase between consecutive radii.
inline CurvatureReport bg_ratio_scan(const Space1D& space, double x0, const CurvatureParams& params,
                                     const std::vector<double>& r_grid, double tol = 1e-6) {
  if (r_grid.size() < 2) throw std::invalid_argument("bg_ratio_scan: need at least two radii");
  CurvatureReport rep;
  rep.kind = "bg_ratio";
  rep.K = params.K();
  rep.N = params.N();
  rep.tolerance = tol;
  rep.grid_step = space.grid_step();
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double r = r_grid[i];
    if (!(r > 0.0)) throw std::domain_error("bg_ratio_scan: radii must be > 0");
    if (i > 0 && !(r > r_grid[i - 1])) throw std::invalid_argument("bg_ratio_scan: r_grid must be increasing");
    detail::check_in_f_domain(params, r, "bg_ratio_scan");
    const double ratio = space.measure_ball(x0, r) / f_vol(params, r);
    if (i > 0) {
      Witness w;
      w.points = {x0, r_grid[i - 1], r};
      w.note = "points = (x0, r_prev, r)";
      rep.observe((ratio - prev) / prev, w);
    }
    prev = ratio;
  }
  rep.finish();
  return rep;
}

struct BoundaryRow {
  double t;
  double lhs;
  double rhs;
};

struct BoundaryScan {
  CurvatureReport report;
  std::vector<BoundaryRow> rows;
};

/// Right-hand side 2 * 5^{N-1} m(B_t) S(t)^{N-1} / F(t) of the boundary
/// measure bound.
inline double bg_boundary_bound(const Space1D& space, double x0, const CurvatureParams& params, double t) {
  detail::check_in_f_domain(params, t, "bg_boundary_bound");
  return 2.0 * std::pow(5.0, params.N() - 1.0) * space.measure_ball(x0, t) * s_vol_power(params, t) /
         f_vol(params, t);
}

/// m_{-1}(dB_t(x0)) <= 2 * 5^{N-1} m(B_t(x0)) S(t)^{N-1} / F(t) on t_grid.
/// max_violation = max (lhs - rhs); min_slack = min (rhs - lhs).
inline BoundaryScan bg_boundary_check(const Space1D& space, double x0, const CurvatureParams& params,
                                      const std::vector<double>& t_grid) {
  BoundaryScan out;
  auto& rep = out.report;
  rep.kind = "bg_boundary";
  rep.K = params.K();
  rep.N = params.N();
  rep.tolerance = 0.0;
  rep.grid_step = space.grid_step();
  double min_slack = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const double lhs = space.boundary_measure(x0, t);
    const double rhs = bg_boundary_bound(space, x0, params, t);
    out.rows.push_back({t, lhs, rhs});
    min_slack = std::min(min_slack, rhs - lhs);
    Witness w;
    w.points = {x0, lhs, rhs};
    w.t = t;
    w.note = "points = (x0, lhs, rhs), t = radius";
    rep.observe(lhs - rhs, w);
  }
  rep.set_extra("min_slack", min_slack);
  // strictly positive slack required
  rep.passed = min_slack > 0.0;
  return out;
}

struct LinearGrowth {
  double empirical;  // sup m(B_s(x)) / s
  double envelope;   // 2 * 5^{N-1} sup tF'/F * sup m(B_t(y))/t
  CurvatureReport report;
};

/// Empirical linear-growth constant over grid points x in B_R(y) and s in
/// s_grid, compared with the covering envelope. Balls that would leave a
/// working window are skipped and counted.
inline LinearGrowth linear_growth_constant(const Space1D& space, double y, double R,
                                           const std::vector<double>& s_grid, const CurvatureParams& params,
                                           std::size_t max_points = 2001) {
  if (!(R > 0.0)) throw std::domain_error("linear_growth_constant: R must be > 0");
  const Grid& g = space.grid();
  std::vector<double> xs;
  for (std::size_t i = 0; i <= g.cells; ++i) {
    const double x = g.edge(i);
    if (space.periodic() && i == g.cells) break;
    if (space.distance(x, y) <= R) xs.push_back(x);
  }
  if (xs.size() > max_points) {
    std::vector<double> thin;
    const double stride = static_cast<double>(xs.size() - 1) / static_cast<double>(max_points - 1);
    for (std::size_t k = 0; k < max_points; ++k) thin.push_back(xs[static_cast<std::size_t>(std::llround(k * stride))]);
    xs.swap(thin);
  }
  LinearGrowth out{0.0, 0.0, {}};
  auto& rep = out.report;
  rep.kind = "linear_growth";
  rep.K = params.K();
  rep.N = params.N();
  rep.grid_step = space.grid_step();
  std::size_t skipped = 0;
  Witness best;
  for (double x : xs) {
    for (double s : s_grid) {
      if (!(s > 0.0 && s <= 1.0)) throw std::domain_error("linear_growth_constant: s must lie in (0,1]");
      if (space.has_window() && s > space.max_radius(x)) {
        ++skipped;
        continue;
      }
      const double c = space.measure_ball(x, s) / s;
      ++rep.evaluations;
      if (c > out.empirical) {
        out.empirical = c;
        best.points = {x, s};
        best.note = "points = (x, s)";
      }
    }
  }
  // envelope on 256 radii in (0, R'] with R' = min(R, reach of balls around y)
  double r_top = std::min(R, space.has_window() ? space.max_radius(y) : R);
  r_top = std::min(r_top, conjugate_radius(params) * (1.0 - 1e-9));
  double sup_growth = 0.0;
  double sup_mass = 0.0;
  constexpr int kSamples = 256;
  for (int k = 1; k <= kSamples; ++k) {
    const double t = r_top * k / kSamples;
    sup_growth = std::max(sup_growth, t * s_vol_power(params, t) / f_vol(params, t));
    sup_mass = std::max(sup_mass, space.measure_ball(y, t) / t);
  }
  out.envelope = 2.0 * std::pow(5.0, params.N() - 1.0) * sup_growth * sup_mass;
  rep.max_violation = out.empirical - out.envelope;
  rep.witness = best;
  rep.tolerance = 0.0;
  rep.set_extra("empirical", out.empirical);
  rep.set_extra("envelope", out.envelope);
  rep.set_extra("skipped_window_balls", static_cast<double>(skipped));
  rep.finish();
  return out;
}

/// Anything with balls: Space1D, Tripod.
template <class S, class P>
concept BallMeasurable = requires(const S& s, const P& p, double r) {
  { s.measure_ball(p, r) } -> std::convertible_to<double>;
  { s.grid_step() } -> std::convertible_to<double>;
};

template <class Point>
struct DensityRatioTrace {
  Point x;
  int k = 1;
  std::vector<double> r_grid;
  std::vector<double> ratios;
  double threshold = 0.0;
  bool in_Mk = false;
};

struct TraceOptions {
  double threshold_fraction = 0.1;  // flag when the tail falls below this fraction of the max
  double tail_fraction = 0.25;      // smallest radii that stand in for the liminf
};

/// m(B_r(x)) / r^k along decreasing radii. A liminf cannot be read off
/// finitely many radii; the flag compares the minimum over the smallest
/// radii against threshold_fraction * max ratio.
template <class Space, class Point>
  requires BallMeasurable<Space, Point>
DensityRatioTrace<Point> density_ratio_trace(const Space& space, const Point& x, int k,
                                             const std::vector<double>& r_grid, TraceOptions opts = {}) {
  if (k < 1) throw std::invalid_argument("density_ratio_trace: k must be a positive integer");
  if (r_grid.empty()) throw std::invalid_argument("density_ratio_trace: empty radius grid");
  DensityRatioTrace<Point> out{x, k, r_grid, {}, 0.0, false};
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > space.grid_step())) throw std::domain_error("density_ratio_trace: radius below grid_step");
    if (i > 0 && !(r_grid[i] < r_grid[i - 1])) {
      throw std::invalid_argument("density_ratio_trace: r_grid must be strictly decreasing");
    }
    out.ratios.push_back(space.measure_ball(x, r_grid[i]) / std::pow(r_grid[i], k));
  }
  const double max_ratio = *std::max_element(out.ratios.begin(), out.ratios.end());
  const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opts.tail_fraction * out.ratios.size())));
  const double tail_min = *std::min_element(out.ratios.end() - static_cast<std::ptrdiff_t>(tail), out.ratios.end());
  out.threshold = opts.threshold_fraction * max_ratio;
  out.in_Mk = tail_min < out.threshold;
  return out;
}

/// Geometric radii from r_max down to r_min.
inline std::vector<double> geometric_radii(double r_max, double r_min, std::size_t count) {
  if (!(r_max > r_min && r_min > 0.0) || count < 2) throw std::invalid_argument("geometric_radii: bad range");
  std::vector<double> out(count);
  const double q = std::pow(r_min / r_max, 1.0 / static_cast<double>(count - 1));
  for (std::size_t i = 0; i < count; ++i) out[i] = r_max * std::pow(q, static_cast<double>(i));
  out.back() = r_min;
  return out;
}

struct PointPair {
  double x;
  double y;
};

struct LipschitzModulus {
  double empirical;    // sup |m(B_r x) - m(B_r y)| / (r d)
  double theoretical;  // sup of the per-pair bound
  std::size_t pairs_within_bound = 0;
  CurvatureReport report;
};

/// Per-pair bound (1/r) F'(r - d/2) / F(r + d/2) (m(B_r x) + m(B_r y)).
inline double lipschitz_bound(const CurvatureParams& params, double r, double d, double mx, double my) {
  return s_vol_power(params, r - 0.5 * d) / f_vol(params, r + 0.5 * d) * (mx + my) / r;
}

inline LipschitzModulus lipschitz_modulus(const Space1D& space, double r, const std::vector<PointPair>& pairs,
                                          const CurvatureParams& params) {
  if (!(r > 2.0 * space.grid_step())) throw std::domain_error("lipschitz_modulus: r must exceed 2 grid steps");
  detail::check_in_f_domain(params, 1.5 * r, "lipschitz_modulus");
  LipschitzModulus out{0.0, 0.0, 0, {}};
  auto& rep = out.report;
  rep.kind = "lipschitz";
  rep.K = params.K();
  rep.N = params.N();
  rep.grid_step = space.grid_step();
  rep.tolerance = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double d = space.distance(pairs[i].x, pairs[i].y);
    if (!(d > 0.0 && d < 0.5 * r)) throw std::domain_error("lipschitz_modulus: pair distance must lie in (0, r/2)");
    const double mx = space.measure_ball(pairs[i].x, r);
    const double my = space.measure_ball(pairs[i].y, r);
    const double emp = std::abs(mx - my) / (r * d);
    const double bound = lipschitz_bound(params, r, d, mx, my);
    out.empirical = std::max(out.empirical, emp);
    out.theoretical = std::max(out.theoretical, bound);
    if (emp <= bound) ++out.pairs_within_bound;
    Witness w;
    w.points = {pairs[i].x, pairs[i].y, emp, bound};
    w.index = i;
    w.note = "points = (x, y, empirical, bound)";
    rep.observe(emp - bound, w);
  }
  rep.set_extra("empirical", out.empirical);
  rep.set_extra("theoretical", out.theoretical);
  rep.set_extra("pairs_within_bound", static_cast<double>(out.pairs_within_bound));
  rep.finish();
  return out;
}

/// Random pairs with 0 < d(x, y) < r/2 whose r-balls stay inside the range.
inline std::vector<PointPair> random_point_pairs(const Space1D& space, double r, std::size_t count, SplitRng& rng) {
  std::vector<PointPair> out;
  out.reserve(count);
  double lo = space.lo();
  double hi = space.hi();
  if (std::holds_alternative<Line>(space.topology())) lo += r;
  if (space.has_window()) hi -= r;
  if (!(hi - lo > 0.5 * r)) throw std::invalid_argument("random_point_pairs: window too small for radius");
  while (out.size() < count) {
    const double d = rng.uniform(0.01, 0.49) * r;
    const double x = rng.uniform(lo, hi - d);
    out.push_back({x, x + d});
  }
  return out;
}

struct ClassificationVerdict {
  Topology1D model;
  std::optional<double> parameter;  // interval length or circle radius
  WeightFn weight;
  std::optional<CurvatureParams> kn_params;
  std::string note;
  std::optional<CurvatureReport> report;
};

/// Reads the model off the descriptor and returns the smallest-K pair of
/// search_params under which the weight passes check_kn_convex.
inline ClassificationVerdict classify(const Space1D& space, const std::vector<CurvatureParams>& search_params,
                                      double tol = 1e-5, BatteryOptions battery_opts = {}) {
  ClassificationVerdict v{space.topology(), std::nullopt, space.weight(), std::nullopt, "", std::nullopt};
  if (const auto* iv = std::get_if<Interval>(&space.topology())) v.parameter = iv->length;
  if (const auto* c = std::get_if<Circle>(&space.topology())) v.parameter = c->radius;
  const auto battery = default_battery(space, battery_opts);
  for (const auto& p : search_params) {
    auto rep = check_kn_convex(space.weight(), space, p, battery, tol);
    rep.seed = battery_opts.seed;
    if (!rep.passed) continue;
    if (!v.kn_params || p.K() < v.kn_params->K()) {
      v.kn_params = p;
      v.report = rep;
    }
  }
  v.note = v.kn_params ? "admissible" : "no admissible (K,N) in search battery";
  return v;
}

}  // namespace curvlab
