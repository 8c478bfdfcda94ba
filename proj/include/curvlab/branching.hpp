#pragma once

// Branching transport on the tripod. Two plans share a source point on edge 0
// and identical endpoint profiles, but one lands on edge 1 and the other on
// edge 2. Each geodesic crosses the center inside the window (a, a + eps), so
// the pushforwards agree up to time a and are mutually singular from a + eps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/transport1d.hpp"
#include "curvlab/tripod.hpp"

namespace curvlab {

class InfeasibleScenario : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BranchingScenario {
  double a = 0.5;
  double b = 0.1;
  double eps = 0.05;
  double eta = 0.5;
  double beta = 1.0;
  double N = 2.0;

  void validate() const {
    if (!(b > 0.0 && b < a && a < 1.0)) throw InfeasibleScenario("scenario: need 0 < b < a < 1");
    if (!(eps > 0.0)) throw InfeasibleScenario("scenario: eps must be > 0");
    if (!(eps < 1.0 - a)) throw InfeasibleScenario("scenario: eps must be < 1 - a");
    if (!(eta > 0.0)) throw InfeasibleScenario("scenario: eta must be > 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw InfeasibleScenario("scenario: beta must lie in (0, 1]");
    if (!(N > 1.0)) throw InfeasibleScenario("scenario: N must be > 1");
  }
};

/// Geodesics from the common source whose endpoints are uniform on
/// [s_lo, s_hi] along end_edge.
struct GeodesicBundle {
  double s_lo;
  double s_hi;
  int end_edge;
  double mass;
};

enum class PlanSide { Up, Down, Mixed };

struct PlanPair {
  BranchingScenario scenario;
  TripodPoint source;    // on edge 0
  double target_lo;      // endpoint window on edges 1 and 2
  double target_hi;
  std::vector<GeodesicBundle> pi_u;
  std::vector<GeodesicBundle> pi_d;
  double prefix_time;    // pushforwards coincide for t <= prefix_time
  double cell_step;      // histogram resolution
  double density_certificate = 0.0;

  double target_width() const { return target_hi - target_lo; }
};

/// Sparse per-edge histogram, cells [k h, (k+1) h) measured from the center.
class TripodHistogram {
 public:
  explicit TripodHistogram(double step) : h_(step) {}

  double step() const noexcept { return h_; }
  const std::map<long, double>& edge_cells(int e) const { return cells_.at(static_cast<std::size_t>(e)); }

  /// Mass spread uniformly over distances [sa, sb] on edge e.
  void deposit(int e, double sa, double sb, double mass) {
    auto& cells = cells_.at(static_cast<std::size_t>(e));
    if (mass == 0.0) return;
    const auto ka = static_cast<long>(std::floor(sa / h_));
    if (!(sb > sa)) {
      cells[ka] += mass;
      return;
    }
    const auto kb = std::max(ka, static_cast<long>(std::ceil(sb / h_)) - 1);
    if (ka == kb) {
      cells[ka] += mass;
      return;
    }
    // clamped overlaps renormalized to the exact mass; a plain remainder
    // can come out roundoff-negative
    auto overlap = [&](long k) {
      return std::max(0.0, std::min(sb, static_cast<double>(k + 1) * h_) - std::max(sa, static_cast<double>(k) * h_));
    };
    double covered = 0.0;
    for (long k = ka; k <= kb; ++k) covered += overlap(k);
    if (!(covered > 0.0)) {
      cells[ka] += mass;
      return;
    }
    for (long k = ka; k <= kb; ++k) {
      const double part = overlap(k);
      if (part > 0.0) cells[k] += mass * part / covered;
    }
  }

  void add(const TripodHistogram& other) {
    for (int e = 0; e < 3; ++e)
      for (const auto& [k, m] : other.edge_cells(e)) cells_[static_cast<std::size_t>(e)][k] += m;
  }

  double total() const {
    double s = 0.0;
    for (const auto& edge : cells_)
      for (const auto& [k, m] : edge) s += m;
    return s;
  }

  /// Mass on edge e.
  double edge_total(int e) const {
    double s = 0.0;
    for (const auto& [k, m] : edge_cells(e)) s += m;
    return s;
  }

  /// sup of the density w.r.t. the tripod measure.
  double max_density(const Tripod& T) const {
    double best = 0.0;
    for (int e = 0; e < 3; ++e)
      for (const auto& [k, m] : edge_cells(e)) best = std::max(best, m / (h_ * T.edge_density(e)));
    return best;
  }

  /// integral rho log rho dm of the unnormalized density rho.
  double shannon(const Tripod& T) const {
    double s = 0.0;
    for (int e = 0; e < 3; ++e)
      for (const auto& [k, m] : edge_cells(e))
        if (m > 0.0) s += m * std::log(m / (h_ * T.edge_density(e)));
    return s;
  }

  /// Ent of the normalized measure.
  double entropy(const Tripod& T) const {
    const double z = total();
    return shannon(T) / z - std::log(z);
  }

  /// integral (d mu / dm)^{1 - 1/N} dm of the normalized measure.
  double renyi_integral(const Tripod& T, double N) const {
    const double z = total();
    const double p = 1.0 - 1.0 / N;
    double s = 0.0;
    for (int e = 0; e < 3; ++e) {
      const double cell = h_ * T.edge_density(e);
      for (const auto& [k, m] : edge_cells(e))
        if (m > 0.0) s += std::pow(m / (z * cell), p) * cell;
    }
    return s;
  }

  /// Total variation distance between the normalized measures.
  double tv_distance(const TripodHistogram& other) const {
    const double za = total();
    const double zb = other.total();
    double s = 0.0;
    for (int e = 0; e < 3; ++e) {
      std::map<long, double> diff;
      for (const auto& [k, m] : edge_cells(e)) diff[k] += m / za;
      for (const auto& [k, m] : other.edge_cells(e)) diff[k] -= m / zb;
      for (const auto& [k, m] : diff) s += std::abs(m);
    }
    return 0.5 * s;
  }

  /// Mass present in cells occupied by both histograms.
  double overlap_mass(const TripodHistogram& other) const {
    double s = 0.0;
    for (int e = 0; e < 3; ++e) {
      const auto& mine = edge_cells(e);
      for (const auto& [k, m] : other.edge_cells(e)) {
        auto it = mine.find(k);
        if (it != mine.end()) s += std::min(m, it->second);
      }
    }
    return s;
  }

  /// Quantile function after unrolling: edge 0 to negative coordinates,
  /// edges 1 and 2 folded onto positive coordinates.
  QuantileFn unrolled_quantile() const {
    std::map<long, double> line;  // cell index on the line: [k h, (k+1) h)
    for (const auto& [k, m] : edge_cells(0)) line[-k - 1] += m;
    for (int e = 1; e < 3; ++e)
      for (const auto& [k, m] : edge_cells(e)) line[k] += m;
    const double z = total();
    std::vector<double> u, x;
    double cum = 0.0;
    for (const auto& [k, m] : line) {
      if (m <= 0.0) continue;
      const double left = static_cast<double>(k) * h_;
      if (u.empty()) {
        u.push_back(0.0);
        x.push_back(left);
      } else if (left > x.back()) {
        u.push_back(cum / z);
        x.push_back(left);
      }
      cum += m;
      u.push_back(std::min(cum / z, 1.0));
      x.push_back(left + h_);
    }
    u.back() = 1.0;
    return QuantileFn(std::move(u), std::move(x));
  }

 private:
  double h_;
  std::array<std::map<long, double>, 3> cells_;
};

inline constexpr std::size_t kPlanStrata = 4096;

/// Pushforward (e_t)# of one plan side (or of both, for Mixed).
inline TripodHistogram pushforward(const PlanPair& pair, double t, PlanSide side) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("pushforward: t must lie in [0,1]");
  TripodHistogram hist(pair.cell_step);
  const double D = pair.source.s;
  auto push = [&](const std::vector<GeodesicBundle>& plan) {
    for (const auto& g : plan) {
      // unrolled position -D + t (D + s): negative on edge 0, positive on end_edge
      const double pa = -D + t * (D + g.s_lo);
      const double pb = -D + t * (D + g.s_hi);
      if (pb <= 0.0) {
        hist.deposit(0, -pb, -pa, g.mass);
      } else if (pa >= 0.0) {
        hist.deposit(g.end_edge, pa, pb, g.mass);
      } else {
        const double neg = -pa / (pb - pa);
        hist.deposit(0, 0.0, -pa, g.mass * neg);
        hist.deposit(g.end_edge, 0.0, pb, g.mass * (1.0 - neg));
      }
    }
  };
  if (side != PlanSide::Down) push(pair.pi_u);
  if (side != PlanSide::Up) push(pair.pi_d);
  return hist;
}

/// Builds pi^u (landing on edge 1) and pi^d (edge 2) from the source w on
/// edge 0 at distance D = eta * min(1, a / (1 - a)). Endpoint windows are
/// chosen so every geodesic crosses the center in [a, a + eps].
inline PlanPair build_branching_plans(const Tripod& T, const BranchingScenario& sc,
                                      std::size_t strata = kPlanStrata) {
  sc.validate();
  if (strata == 0) throw std::invalid_argument("build_branching_plans: need at least one stratum");
  const double D = sc.eta * std::min(1.0, sc.a / (1.0 - sc.a));
  const double s_hi = D * (1.0 - sc.a) / sc.a;
  const double s_lo = D * (1.0 - sc.a - sc.eps) / (sc.a + sc.eps);
  if (D > T.edge_length(0)) throw InfeasibleScenario("scenario: source does not fit on edge 0");
  if (s_hi > T.edge_length(1) || s_hi > T.edge_length(2)) {
    throw InfeasibleScenario("scenario: branch window misses the center (targets exceed edges 1/2)");
  }
  const double width = s_hi - s_lo;
  PlanPair pair;
  pair.scenario = sc;
  pair.source = {0, D};
  pair.target_lo = s_lo;
  pair.target_hi = s_hi;
  pair.prefix_time = sc.a;
  pair.cell_step = sc.b * width / 1024.0;
  const double m = sc.beta / static_cast<double>(strata);
  for (std::size_t k = 0; k < strata; ++k) {
    const double lo = s_lo + width * static_cast<double>(k) / static_cast<double>(strata);
    const double hi = (k + 1 == strata) ? s_hi : s_lo + width * static_cast<double>(k + 1) / static_cast<double>(strata);
    pair.pi_u.push_back({lo, hi, 1, m});
    pair.pi_d.push_back({lo, hi, 2, m});
  }
  // density bounds of (e_b)# pi^d and (e_1)# pi^{u,d}, measured
  pair.density_certificate = std::max({pushforward(pair, sc.b, PlanSide::Down).max_density(T),
                                       pushforward(pair, 1.0, PlanSide::Down).max_density(T),
                                       pushforward(pair, 1.0, PlanSide::Up).max_density(T)});
  return pair;
}

inline double entropy_along(const PlanPair& pair, const Tripod& T, double t, PlanSide side) {
  return pushforward(pair, t, side).entropy(T);
}

struct BranchingInequality {
  double lhs;
  double rhs;
  double density_certificate;
  double ball_mass;        // m(B(center, eta/2))
  bool rhs_negative;
  bool contradiction;      // lhs > rhs: the K-convexity chain is violated
};

/// eps (log(eps / (10 m(B(x, eta/2)))) - log C) <= -(1-a-eps) log 2 ((a-b)/(1-b) - a(a+eps-b)/3)
/// with x the branch point and C the measured density certificate.
inline BranchingInequality appendix_inequality(const PlanPair& pair, const Tripod& T) {
  const auto& sc = pair.scenario;
  const double ball = T.measure_ball(TripodPoint::center(), 0.5 * sc.eta);
  const double C = pair.density_certificate;
  const double lhs = sc.eps * (std::log(sc.eps / (10.0 * ball)) - std::log(C));
  const double rhs = -(1.0 - sc.a - sc.eps) * std::numbers::ln2 *
                     ((sc.a - sc.b) / (1.0 - sc.b) - sc.a * (sc.a + sc.eps - sc.b) / 3.0);
  return {lhs, rhs, C, ball, rhs < 0.0, lhs > rhs};
}

struct RenyiContradiction {
  double ratio;
  double threshold;          // 2^{1/N}
  double chain_coefficient;  // 2^{1/N} (a-b)/(a+eps-b) (1-a-eps)/(1-a)
  bool passed;
};

inline constexpr double kRenyiTolerance = 5e-3;

/// Measured ratio [eps R(mu_b) + (a-b) R(mu_{a+eps})] / ((a+eps-b) R(mu_a))
/// on the mixed plan, R(mu) = integral (d mu / dm)^{1-1/N} dm. It tends to
/// 2^{1/N} as eps -> 0, which contradicts the Renyi convexity bound.
inline RenyiContradiction renyi_contradiction(const PlanPair& pair, const Tripod& T, double N) {
  if (!(N > 1.0)) throw std::domain_error("renyi_contradiction: N must be > 1");
  const auto& sc = pair.scenario;
  const double span = sc.a + sc.eps - sc.b;
  const double rb = pushforward(pair, sc.b, PlanSide::Mixed).renyi_integral(T, N);
  const double ra = pushforward(pair, sc.a, PlanSide::Mixed).renyi_integral(T, N);
  const double re = pushforward(pair, sc.a + sc.eps, PlanSide::Mixed).renyi_integral(T, N);
  const double ratio = (sc.eps / span * rb + (sc.a - sc.b) / span * re) / ra;
  const double threshold = std::pow(2.0, 1.0 / N);
  const double chain = threshold * (sc.a - sc.b) / span * (1.0 - sc.a - sc.eps) / (1.0 - sc.a);
  return {ratio, threshold, chain, ratio >= threshold * (1.0 - kRenyiTolerance)};
}

struct ShannonGap {
  double gap;  // > 0: K-convexity fails between times b and a + eps at time a
  double ent_b;
  double ent_a;
  double ent_end;
  double w2;
};

/// Ent(mu_a) - [lambda' Ent(mu_b) + lambda Ent(mu_{a+eps}) + |K|/2 eps (a-b)/(a+eps-b)^2 W2^2]
/// for the mixed plan, lambda = (a-b)/(a+eps-b), lambda' = eps/(a+eps-b).
inline ShannonGap shannon_k_gap(const PlanPair& pair, const Tripod& T, double K) {
  const auto& sc = pair.scenario;
  const double span = sc.a + sc.eps - sc.b;
  const auto hb = pushforward(pair, sc.b, PlanSide::Mixed);
  const auto ha = pushforward(pair, sc.a, PlanSide::Mixed);
  const auto he = pushforward(pair, sc.a + sc.eps, PlanSide::Mixed);
  const double dist = w2(hb.unrolled_quantile(), he.unrolled_quantile());
  ShannonGap g{0.0, hb.entropy(T), ha.entropy(T), he.entropy(T), dist};
  g.gap = g.ent_a - (sc.eps / span * g.ent_b + (sc.a - sc.b) / span * g.ent_end +
                     0.5 * std::abs(K) * sc.eps * (sc.a - sc.b) / (span * span) * dist * dist);
  return g;
}

struct LowerEntropyBound {
  double value;  // integral rho^u log rho^u dm at a + eps (mass beta)
  double bound;  // beta log(eps / (10 m(B(x, eta/2))))
  bool holds;
};

inline LowerEntropyBound lower_entropy_bound(const PlanPair& pair, const Tripod& T) {
  const auto& sc = pair.scenario;
  const double value = pushforward(pair, sc.a + sc.eps, PlanSide::Up).shannon(T);
  const double ball = T.measure_ball(TripodPoint::center(), 0.5 * sc.eta);
  const double bound = sc.beta * std::log(sc.eps / (10.0 * ball));
  return {value, bound, value >= bound};
}

struct SweepRow {
  double eps;
  double lhs;
  double rhs;
  double ratio;
};

/// Both sides of the branching inequality and the Renyi ratio for each eps.
inline std::vector<SweepRow> branching_sweep(const Tripod& T, BranchingScenario sc, const std::vector<double>& eps_list) {
  std::vector<SweepRow> rows;
  for (double e : eps_list) {
    sc.eps = e;
    const PlanPair pair = build_branching_plans(T, sc);
    const auto ineq = appendix_inequality(pair, T);
    const auto ren = renyi_contradiction(pair, T, sc.N);
    rows.push_back({e, ineq.lhs, ineq.rhs, ren.ratio});
  }
  return rows;
}

}  // namespace curvlab
