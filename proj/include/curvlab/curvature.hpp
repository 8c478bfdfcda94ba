#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/coefficients.hpp"
#include "curvlab/report.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/space1d.hpp"
#include "curvlab/transport1d.hpp"

namespace curvlab {

/// Endpoints of a geodesic and the times at which it is probed.
struct TriplePlan {
  double x0;
  double x1;
  std::vector<double> t_grid;
  Arc arc = Arc::Shorter;
};

inline std::vector<double> eighths() { return {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875}; }

struct BatteryOptions {
  std::size_t coarse_points = 64;
  std::size_t random_triples = 256;
  std::uint64_t seed = 20240601;
};

/// All pairs of a coarse grid with t in {1/8, ..., 7/8}, plus random
/// (x0, x1, t) triples. Antipodal circle pairs are probed along both arcs.
inline std::vector<TriplePlan> default_battery(const Space1D& space, BatteryOptions opts = {}) {
  std::vector<double> pts;
  const std::size_t n = opts.coarse_points;
  if (n < 2) throw std::invalid_argument("default_battery: need at least two coarse points");
  for (std::size_t i = 0; i < n; ++i) {
    if (space.periodic()) {
      pts.push_back(space.circumference() * static_cast<double>(i) / static_cast<double>(n));
    } else {
      pts.push_back(space.lo() + (space.hi() - space.lo()) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  }
  std::vector<TriplePlan> plans;
  auto add = [&](double a, double b, std::vector<double> ts) {
    if (space.is_antipodal(a, b)) {
      plans.push_back({a, b, ts, Arc::Positive});
      plans.push_back({a, b, std::move(ts), Arc::Negative});
    } else {
      plans.push_back({a, b, std::move(ts), Arc::Shorter});
    }
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) add(pts[i], pts[j], eighths());
  SplitRng rng(opts.seed);
  const double lo = space.periodic() ? 0.0 : space.lo();
  const double hi = space.periodic() ? space.circumference() : space.hi();
  for (std::size_t k = 0; k < opts.random_triples; ++k) {
    const double a = rng.uniform(lo, hi);
    double b = rng.uniform(lo, hi);
    const double t = rng.uniform(0.0, 1.0);
    if (a == b) b = std::nextafter(a, hi);
    add(a, b, {t});
  }
  return plans;
}

/// sigma^{(1-t)}(d) g(x0) + sigma^{(t)}(d) g(x1) - g(x_t) with g = e^{-f/N}.
/// Positive means the (K,N)-convexity inequality fails. Empty in the
/// conjugate regime.
inline std::optional<double> kn_margin(const WeightFn& f, const Space1D& space, const CurvatureParams& params,
                                       double x0, double x1, double t, Arc arc = Arc::Shorter) {
  const double d = space.distance(x0, x1);
  const ExtReal s0 = sigma(1.0 - t, params, d);
  const ExtReal s1 = sigma(t, params, d);
  if (s0.is_infinite() || s1.is_infinite()) return std::nullopt;
  const double xt = space.geodesic_point(x0, x1, t, arc);
  auto g = [&](double x) { return std::exp(-f(space.canonical(x)) / params.N()); };
  return s0.value() * g(x0) + s1.value() * g(x1) - g(xt);
}

inline CurvatureReport check_kn_convex(const WeightFn& f, const Space1D& space, const CurvatureParams& params,
                                       const std::vector<TriplePlan>& battery, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("check_kn_convex: tol must be > 0");
  CurvatureReport rep;
  rep.kind = "kn_convexity";
  rep.K = params.K();
  rep.N = params.N();
  rep.tolerance = tol;
  rep.grid_step = space.grid_step();
  for (std::size_t i = 0; i < battery.size(); ++i) {
    const auto& plan = battery[i];
    if (space.distance(plan.x0, plan.x1) == 0.0) throw std::invalid_argument("check_kn_convex: plan with x0 == x1");
    for (double t : plan.t_grid) {
      const auto m = kn_margin(f, space, params, plan.x0, plan.x1, t, plan.arc);
      if (!m) {
        ++rep.conjugate_skipped;
        continue;
      }
      Witness w;
      w.points = {plan.x0, space.geodesic_point(plan.x0, plan.x1, t, plan.arc), plan.x1};
      w.t = t;
      w.index = i;
      w.note = plan.arc == Arc::Shorter ? "shorter arc" : (plan.arc == Arc::Positive ? "positive arc" : "negative arc");
      rep.observe(*m, w);
    }
  }
  if (rep.conjugate_skipped > 0) rep.set_extra("conjugate_regime_plans", static_cast<double>(rep.conjugate_skipped));
  rep.finish();
  return rep;
}

struct DifferentialCriterion {
  CurvatureReport report;
  std::vector<double> coords;
  std::vector<double> margins;  // K + V'^2/N - V'' per interior node
};

/// V'' >= K + V'^2/N at interior sample nodes by (non-uniform) central
/// differences. This is the form equivalent to e^{-V/N}'' <= -(K/N) e^{-V/N}.
inline DifferentialCriterion differential_criterion(const WeightFn& f, const CurvatureParams& params,
                                                    double tol = 1e-4) {
  const auto& x = f.coords();
  const auto& v = f.values();
  if (x.size() < 5) throw std::invalid_argument("differential_criterion: insufficient resolution (< 5 nodes)");
  DifferentialCriterion out;
  auto& rep = out.report;
  rep.kind = "differential_criterion";
  rep.K = params.K();
  rep.N = params.N();
  rep.tolerance = tol;
  rep.grid_step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double h1 = x[i] - x[i - 1];
    const double h2 = x[i + 1] - x[i];
    const double den = h1 * h2 * (h1 + h2);
    const double d2 = 2.0 * (h1 * v[i + 1] - (h1 + h2) * v[i] + h2 * v[i - 1]) / den;
    const double d1 = (h1 * h1 * v[i + 1] - h2 * h2 * v[i - 1] + (h2 * h2 - h1 * h1) * v[i]) / den;
    const double margin = params.K() + d1 * d1 / params.N() - d2;
    out.coords.push_back(x[i]);
    out.margins.push_back(margin);
    Witness w;
    w.points = {x[i]};
    w.index = i;
    rep.observe(margin, w);
  }
  rep.finish();
  return out;
}

using MeasurePair = std::pair<ProbMeasure1D, ProbMeasure1D>;

namespace detail {

inline std::vector<double> with_endpoints(const std::vector<double>& t_grid) {
  std::vector<double> ts{0.0, 1.0};
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("t_grid entries must lie in (0,1)");
    ts.push_back(t);
  }
  return ts;
}

inline double finite_entropy(const ProbMeasure1D& mu, const Space1D& space) {
  const double e = entropy(mu, space);
  if (!std::isfinite(e)) throw std::domain_error("entropy diverged along the geodesic");
  return e;
}

}  // namespace detail

/// e^{-Ent(mu_t)/N} >= sigma^{(1-t)}(W2) e^{-Ent(mu_0)/N} + sigma^{(t)}(W2) e^{-Ent(mu_1)/N}.
/// All three entropies come from the same re-binning pipeline.
inline CurvatureReport verify_cde(const Space1D& space, const CurvatureParams& params,
                                  const std::vector<MeasurePair>& pairs, const std::vector<double>& t_grid,
                                  double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("verify_cde: tol must be > 0");
  CurvatureReport rep;
  rep.kind = "cde";
  rep.K = params.K();
  rep.N = params.N();
  rep.tolerance = tol;
  rep.grid_step = space.grid_step();
  const auto ts = detail::with_endpoints(t_grid);
  const double N = params.N();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto geo = geodesic(space, pairs[i].first, pairs[i].second, ts);
    const double e0 = detail::finite_entropy(geo.interpolants[0], space);
    const double e1 = detail::finite_entropy(geo.interpolants[1], space);
    for (std::size_t k = 2; k < ts.size(); ++k) {
      const double t = ts[k];
      const ExtReal s0 = sigma(1.0 - t, params, geo.w2);
      const ExtReal s1 = sigma(t, params, geo.w2);
      if (s0.is_infinite() || s1.is_infinite()) {
        ++rep.conjugate_skipped;
        continue;
      }
      const double et = detail::finite_entropy(geo.interpolants[k], space);
      const double margin = s0.value() * std::exp(-e0 / N) + s1.value() * std::exp(-e1 / N) - std::exp(-et / N);
      Witness w;
      w.points = {e0, et, e1, geo.w2};
      w.t = t;
      w.index = i;
      w.note = "points = (Ent0, Ent_t, Ent1, W2)";
      rep.observe(margin, w);
    }
  }
  rep.finish();
  return rep;
}

/// Ent(mu_t) <= (1-t) Ent(mu_0) + t Ent(mu_1) - (K/2) t (1-t) W2^2.
inline CurvatureReport verify_cd_infty(const Space1D& space, double K, const std::vector<MeasurePair>& pairs,
                                       const std::vector<double>& t_grid, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("verify_cd_infty: tol must be > 0");
  if (!std::isfinite(K)) throw std::domain_error("verify_cd_infty: K must be finite");
  CurvatureReport rep;
  rep.kind = "cd_infty";
  rep.K = K;
  rep.tolerance = tol;
  rep.grid_step = space.grid_step();
  const auto ts = detail::with_endpoints(t_grid);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto geo = geodesic(space, pairs[i].first, pairs[i].second, ts);
    const double e0 = detail::finite_entropy(geo.interpolants[0], space);
    const double e1 = detail::finite_entropy(geo.interpolants[1], space);
    for (std::size_t k = 2; k < ts.size(); ++k) {
      const double t = ts[k];
      const double et = detail::finite_entropy(geo.interpolants[k], space);
      const double margin = et - (1.0 - t) * e0 - t * e1 + 0.5 * K * t * (1.0 - t) * geo.w2 * geo.w2;
      Witness w;
      w.points = {e0, et, e1, geo.w2};
      w.t = t;
      w.index = i;
      w.note = "points = (Ent0, Ent_t, Ent1, W2)";
      rep.observe(margin, w);
    }
  }
  rep.finish();
  return rep;
}

/// Random uniform-interval pairs inside the working range.
inline std::vector<MeasurePair> uniform_pair_battery(const Space1D& space, std::size_t count, SplitRng& rng,
                                                     double min_frac = 0.05, double max_frac = 0.5) {
  const double lo = space.periodic() ? 0.0 : space.lo();
  const double span = (space.periodic() ? space.circumference() : space.hi()) - lo;
  std::vector<MeasurePair> out;
  out.reserve(count);
  auto draw = [&]() {
    const double len = span * rng.uniform(min_frac, max_frac);
    const double a = space.periodic() ? rng.uniform(0.0, span) : lo + rng.uniform(0.0, span - len);
    return ProbMeasure1D::uniform(space, a, a + len);
  };
  for (std::size_t i = 0; i < count; ++i) {
    auto m0 = draw();
    auto m1 = draw();
    out.emplace_back(std::move(m0), std::move(m1));
  }
  return out;
}

struct ObstructionOptions {
  double d_start = 1.0;
  int halvings = 40;
};

/// Symmetric triples (xbar - d/2, xbar, xbar + d/2) around the maximizer of
/// the weight on a circle, with d halving from d_start. Returns the first
/// triple violating (K,N)-convexity. passed == true means a violating triple
/// was found, i.e. the circle is correctly rejected for K > 0.
inline CurvatureReport circle_obstruction(const Space1D& space, const CurvatureParams& params,
                                          ObstructionOptions opts = {}) {
  if (!space.periodic()) throw std::invalid_argument("circle_obstruction: space must be a circle");
  if (!(params.K() > 0.0)) throw std::domain_error("circle_obstruction: requires K > 0");
  const auto& w = space.weight();
  const double circ = space.circumference();
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w.coords()[i] >= circ) break;
    if (w.values()[i] > w.values()[best]) best = i;
  }
  const double xbar = space.canonical(w.coords()[best]);
  const double d_max = std::min(0.5 * circ, std::numbers::pi * std::sqrt(params.N() / params.K()));
  double d = std::min(opts.d_start, 0.999 * d_max);
  const double root = std::sqrt(params.K() / params.N());

  CurvatureReport rep;
  rep.kind = "circle_obstruction";
  rep.K = params.K();
  rep.N = params.N();
  rep.tolerance = 0.0;
  rep.grid_step = space.grid_step();
  bool found = false;
  for (int j = 0; j <= opts.halvings; ++j, d *= 0.5) {
    const double x0 = space.canonical(xbar - 0.5 * d);
    const double x1 = space.canonical(xbar + 0.5 * d);
    const auto m = kn_margin(w, space, params, x0, x1, 0.5);
    ++rep.evaluations;
    if (!m) {
      ++rep.conjugate_skipped;
      continue;
    }
    if (*m > 0.0) {
      const double gbar = std::exp(-w(xbar) / params.N());
      rep.max_violation = *m;
      rep.witness.points = {x0, space.geodesic_point(x0, x1, 0.5), x1};
      rep.witness.t = 0.5;
      rep.witness.index = static_cast<std::size_t>(j);
      rep.witness.note = "symmetric triple around the weight maximizer";
      rep.set_extra("d", space.distance(x0, x1));
      rep.set_extra("violation_factor", (*m + gbar) / gbar);
      rep.set_extra("analytic_factor", 1.0 / std::cos(0.5 * space.distance(x0, x1) * root));
      found = true;
      break;
    }
  }
  rep.set_extra("obstruction_found", found ? 1.0 : 0.0);
  rep.passed = found;
  if (!found) rep.witness.note = "no violating triple found: anomaly";
  return rep;
}

}  // namespace curvlab
