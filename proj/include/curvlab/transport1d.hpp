#pragma once

// Exact one-dimensional optimal transport. Measures are cell histograms on
// the space grid; their quantile functions are piecewise linear, so W2 and
// displacement interpolation are evaluated piece by piece without sampling
// error.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvlab/space1d.hpp"

namespace curvlab {

class SpaceMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Spread mass uniformly over [a, b] into the cells of grid.
inline void deposit_uniform(const Grid& grid, std::vector<double>& cells, double a, double b, double mass) {
  if (mass == 0.0) return;
  const double h = grid.step();
  if (grid.periodic) {
    const double c = grid.hi - grid.lo;
    const double shift = std::floor((a - grid.lo) / c) * c;
    a -= shift;
    b -= shift;
    if (b > grid.hi) {
      const double len = b - a;
      if (len >= c) {
        // wraps fully at least once; split into whole turns plus remainder
        const double turns = std::floor(len / c);
        const double per_turn = mass * c / len;
        for (std::size_t i = 0; i < grid.cells; ++i) cells[i] += turns * per_turn / static_cast<double>(grid.cells);
        deposit_uniform(grid, cells, a, b - turns * c, mass - turns * per_turn);
        return;
      }
      const double first = (grid.hi - a) / len;
      deposit_uniform(grid, cells, a, grid.hi, mass * first);
      deposit_uniform(grid, cells, grid.lo, b - c, mass * (1.0 - first));
      return;
    }
  } else {
    const double slack = 1e-9 * (grid.hi - grid.lo);
    if (a < grid.lo - slack || b > grid.hi + slack) {
      throw std::out_of_range("deposit: mass placed outside the grid range");
    }
    a = std::clamp(a, grid.lo, grid.hi);
    b = std::clamp(b, grid.lo, grid.hi);
  }
  auto cell_of = [&](double x) {
    const double k = std::floor((x - grid.lo) / h);
    if (k < 0.0) return std::size_t{0};
    return std::min(static_cast<std::size_t>(k), grid.cells - 1);
  };
  const std::size_t ia = cell_of(a);
  if (!(b > a)) {
    cells[ia] += mass;
    return;
  }
  const std::size_t ib = cell_of(b);
  if (ia == ib) {
    cells[ia] += mass;
    return;
  }
  // cell_of and Grid::edge round differently, so clamp each overlap and
  // renormalize to conserve mass exactly
  auto overlap = [&](std::size_t i) {
    return std::max(0.0, std::min(b, grid.edge(i + 1)) - std::max(a, grid.edge(i)));
  };
  double total = 0.0;
  for (std::size_t i = ia; i <= ib; ++i) total += overlap(i);
  if (!(total > 0.0)) {
    cells[ia] += mass;
    return;
  }
  for (std::size_t i = ia; i <= ib; ++i) cells[i] += mass * overlap(i) / total;
}

}  // namespace detail

/// Probability measure with piecewise-constant density w.r.t. H^1 on the
/// cells of a space grid.
class ProbMeasure1D {
 public:
  ProbMeasure1D(const Grid& grid, std::vector<double> cell_mass) : grid_(grid), mass_(std::move(cell_mass)) {
    if (mass_.size() != grid_.cells) throw std::invalid_argument("ProbMeasure1D: cell count mismatch");
    double total = 0.0;
    for (double m : mass_) {
      if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("ProbMeasure1D: negative or NaN mass");
      total += m;
    }
    if (!(total > 0.0)) throw std::invalid_argument("ProbMeasure1D: zero total mass");
    for (double& m : mass_) m /= total;
  }

  /// Uniform probability on [a, b] (a < b). On a circle b may exceed the
  /// circumference and wraps.
  static ProbMeasure1D uniform(const Space1D& space, double a, double b) {
    if (!(b > a)) throw std::invalid_argument("ProbMeasure1D::uniform: need a < b");
    std::vector<double> cells(space.grid().cells, 0.0);
    detail::deposit_uniform(space.grid(), cells, a, b, 1.0);
    return ProbMeasure1D(space.grid(), std::move(cells));
  }

  /// Normalized density proportional to rho (w.r.t. H^1); cell masses by
  /// Simpson's rule on each cell.
  static ProbMeasure1D from_density(const Space1D& space, const std::function<double(double)>& rho) {
    const Grid& g = space.grid();
    std::vector<double> cells(g.cells);
    for (std::size_t i = 0; i < g.cells; ++i) {
      const double a = g.edge(i);
      const double b = g.edge(i + 1);
      cells[i] = (b - a) / 6.0 * (rho(a) + 4.0 * rho(0.5 * (a + b)) + rho(b));
    }
    return ProbMeasure1D(g, std::move(cells));
  }

  struct Atom {
    double x;
    double mass;
  };

  /// Atoms replaced by uniform bumps of the given width.
  static ProbMeasure1D smeared_atoms(const Space1D& space, const std::vector<Atom>& atoms, double width = 1e-4) {
    if (!(width > 0.0)) throw std::invalid_argument("smeared_atoms: width must be > 0");
    std::vector<double> cells(space.grid().cells, 0.0);
    for (const auto& a : atoms) {
      detail::deposit_uniform(space.grid(), cells, a.x - 0.5 * width, a.x + 0.5 * width, a.mass);
    }
    return ProbMeasure1D(space.grid(), std::move(cells));
  }

  const Grid& grid() const noexcept { return grid_; }
  const std::vector<double>& cell_mass() const noexcept { return mass_; }
  double density(std::size_t cell) const { return mass_[cell] / grid_.step(); }
  /// Density w.r.t. H^1 at coordinate x (cell value).
  double density_at(double x) const {
    const double k = std::floor((x - grid_.lo) / grid_.step());
    const auto i = std::min(static_cast<std::size_t>(std::max(k, 0.0)), grid_.cells - 1);
    return density(i);
  }
  double total_mass() const {
    double s = 0.0;
    for (double m : mass_) s += m;
    return s;
  }
  double support_lo() const {
    for (std::size_t i = 0; i < mass_.size(); ++i)
      if (mass_[i] > 0.0) return grid_.edge(i);
    return grid_.hi;
  }
  double support_hi() const {
    for (std::size_t i = mass_.size(); i-- > 0;)
      if (mass_[i] > 0.0) return grid_.edge(i + 1);
    return grid_.lo;
  }
  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) s += mass_[i] * grid_.center(i);
    return s;
  }
  /// Total-variation distance (half the L1 distance of cell masses).
  double tv_distance(const ProbMeasure1D& other) const {
    if (!(grid_ == other.grid_)) throw SpaceMismatch("tv_distance: measures live on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) s += std::abs(mass_[i] - other.mass_[i]);
    return 0.5 * s;
  }

 private:
  Grid grid_;
  std::vector<double> mass_;
};

/// Monotone quantile function as a piecewise-linear map u -> x. Consecutive
/// nodes with equal u encode a jump; equal x encodes an atom.
class QuantileFn {
 public:
  struct Piece {
    double ua, ub, xa, xb;
    double at(double u) const {
      if (ub == ua) return xa;
      return xa + (xb - xa) * (u - ua) / (ub - ua);
    }
  };

  QuantileFn() = default;
  QuantileFn(std::vector<double> u, std::vector<double> x) : u_(std::move(u)), x_(std::move(x)) {
    if (u_.size() != x_.size() || u_.size() < 2) throw std::invalid_argument("QuantileFn: bad node arrays");
    for (std::size_t i = 1; i < u_.size(); ++i) {
      if (u_[i] < u_[i - 1] || x_[i] < x_[i - 1]) throw std::invalid_argument("QuantileFn: nodes not monotone");
    }
    if (u_.front() != 0.0 || std::abs(u_.back() - 1.0) > 1e-12) {
      throw std::invalid_argument("QuantileFn: u-range must be [0, 1]");
    }
    u_.back() = 1.0;
  }

  const std::vector<double>& u_nodes() const noexcept { return u_; }
  const std::vector<double>& x_nodes() const noexcept { return x_; }

  /// Q(u) = inf{x : CDF(x) >= u}.
  double operator()(double u) const {
    if (u <= 0.0) return first_x_at_zero();
    if (u >= 1.0) return x_.back();
    auto it = std::lower_bound(u_.begin(), u_.end(), u);
    const std::size_t j = static_cast<std::size_t>(it - u_.begin());
    if (u_[j] == u) return x_[j];
    return Piece{u_[j - 1], u_[j], x_[j - 1], x_[j]}.at(u);
  }

  /// Pieces with positive u-length, in increasing u.
  std::vector<Piece> pieces() const {
    std::vector<Piece> out;
    out.reserve(u_.size());
    for (std::size_t i = 0; i + 1 < u_.size(); ++i) {
      if (u_[i + 1] > u_[i]) out.push_back({u_[i], u_[i + 1], x_[i], x_[i + 1]});
    }
    return out;
  }

  /// Adds nodes at u = k/n that are not already present.
  QuantileFn with_uniform_nodes(std::size_t n) const {
    std::vector<double> u, x;
    u.reserve(u_.size() + n);
    x.reserve(u_.size() + n);
    std::size_t k = 1;
    for (std::size_t i = 0; i < u_.size(); ++i) {
      while (k < n && static_cast<double>(k) / static_cast<double>(n) < u_[i]) {
        const double uk = static_cast<double>(k) / static_cast<double>(n);
        u.push_back(uk);
        x.push_back(Piece{u_[i - 1], u_[i], x_[i - 1], x_[i]}.at(uk));
        ++k;
      }
      while (k < n && static_cast<double>(k) / static_cast<double>(n) == u_[i]) ++k;
      u.push_back(u_[i]);
      x.push_back(x_[i]);
    }
    return QuantileFn(std::move(u), std::move(x));
  }

 private:
  double first_x_at_zero() const {
    std::size_t j = 0;
    while (j + 1 < u_.size() && u_[j + 1] == 0.0) ++j;
    return x_[j];
  }

  std::vector<double> u_;
  std::vector<double> x_;
};

/// Finitely many atoms; used for exact checks against linear programming.
struct DiscreteMeasure1D {
  std::vector<double> x;
  std::vector<double> mass;

  QuantileFn quantile() const {
    if (x.size() != mass.size() || x.empty()) throw std::invalid_argument("DiscreteMeasure1D: bad atoms");
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    double total = 0.0;
    for (double m : mass) {
      if (!(m >= 0.0)) throw std::invalid_argument("DiscreteMeasure1D: negative mass");
      total += m;
    }
    std::vector<double> u{0.0}, q{x[order[0]]};
    double cum = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t i = order[k];
      if (mass[i] == 0.0) continue;
      if (x[i] > q.back()) {
        u.push_back(cum);
        q.push_back(x[i]);
      }
      cum += mass[i] / total;
      u.push_back(k + 1 == order.size() ? 1.0 : std::min(cum, 1.0));
      q.push_back(x[i]);
    }
    u.back() = 1.0;
    return QuantileFn(std::move(u), std::move(q));
  }
};

inline constexpr std::size_t kQuantileNodes = 4096;

/// Quantile function of a histogram measure. Exact breakpoints at cell edges
/// plus a uniform u-grid of kQuantileNodes nodes.
inline QuantileFn quantile(const ProbMeasure1D& mu) {
  const Grid& g = mu.grid();
  const auto& m = mu.cell_mass();
  std::vector<double> u, x;
  double cum = 0.0;
  bool started = false;
  for (std::size_t i = 0; i < g.cells; ++i) {
    if (m[i] <= 0.0) continue;
    const double left = g.edge(i);
    if (!started) {
      u.push_back(0.0);
      x.push_back(left);
      started = true;
    } else if (left > x.back()) {
      u.push_back(cum);
      x.push_back(left);
    }
    cum += m[i];
    u.push_back(cum);
    x.push_back(g.edge(i + 1));
  }
  for (double& v : u) v = std::min(v / cum, 1.0);
  u.back() = 1.0;
  return QuantileFn(std::move(u), std::move(x)).with_uniform_nodes(kQuantileNodes);
}

namespace detail {

// Walk the common refinement of two piece lists covering [0, 1].
template <class Fn>
void for_each_common_piece(const std::vector<QuantileFn::Piece>& p, const std::vector<QuantileFn::Piece>& q, Fn&& fn) {
  std::size_t i = 0, j = 0;
  double u = 0.0;
  while (i < p.size() && j < q.size()) {
    const double ub = std::min(p[i].ub, q[j].ub);
    if (ub > u) fn(u, ub, p[i].at(u), p[i].at(ub), q[j].at(u), q[j].at(ub));
    u = std::max(u, ub);
    if (p[i].ub <= u) ++i;
    if (j < q.size() && q[j].ub <= u) ++j;
  }
}

// Pieces of v -> Q(v - floor v) + floor(v) C restricted to u = v - shift in [0, 1].
inline std::vector<QuantileFn::Piece> lifted_pieces(const std::vector<QuantileFn::Piece>& base, double shift,
                                                    double circumference) {
  std::vector<QuantileFn::Piece> out;
  out.reserve(base.size() + 4);
  for (int k = -2; k <= 2; ++k) {
    for (const auto& p : base) {
      const double ua = p.ua + k - shift;
      const double ub = p.ub + k - shift;
      if (ub <= 0.0 || ua >= 1.0) continue;
      const double lo = std::max(ua, 0.0);
      const double hi = std::min(ub, 1.0);
      const QuantileFn::Piece moved{ua, ub, p.xa + k * circumference, p.xb + k * circumference};
      out.push_back({lo, hi, moved.at(lo), moved.at(hi)});
    }
  }
  if (!out.empty()) {
    out.front().ua = 0.0;
    out.back().ub = 1.0;
  }
  return out;
}

inline double squared_distance(const std::vector<QuantileFn::Piece>& p, const std::vector<QuantileFn::Piece>& q) {
  double total = 0.0;
  for_each_common_piece(p, q, [&](double ua, double ub, double pa, double pb, double qa, double qb) {
    const double da = pa - qa;
    const double db = pb - qb;
    total += (ub - ua) * (da * da + da * db + db * db) / 3.0;
  });
  return total;
}

}  // namespace detail

/// Line formula: (integral_0^1 |Q0 - Q1|^2 du)^{1/2}.
inline double w2(const QuantileFn& q0, const QuantileFn& q1) {
  return std::sqrt(std::max(0.0, detail::squared_distance(q0.pieces(), q1.pieces())));
}

struct CircleShift {
  double theta;  // label shift of the lifted target quantile
  double w2_squared;
};

struct CircleSearchOptions {
  std::size_t coarse = 512;
  double theta_tol = 1e-12;
};

/// Minimizes theta -> integral |Q0(u) - Q1~(u + theta)|^2 over theta in
/// [-1, 1], Q1~ the periodic lift of Q1. Coarse scan then golden section.
inline CircleShift circle_shift(const QuantileFn& q0, const QuantileFn& q1, double circumference,
                                CircleSearchOptions opts = {}) {
  if (opts.coarse < 256) throw std::invalid_argument("circle_shift: need at least 256 coarse shifts");
  const auto p0 = q0.pieces();
  const auto p1 = q1.pieces();
  auto cost = [&](double theta) { return detail::squared_distance(p0, detail::lifted_pieces(p1, theta, circumference)); };
  const std::size_t n = opts.coarse;
  auto theta_at = [&](std::size_t k) { return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1); };
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double c = cost(theta_at(k));
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  double a = theta_at(best == 0 ? 0 : best - 1);
  double b = theta_at(std::min(best + 1, n - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = cost(c);
  double fd = cost(d);
  while (b - a > opts.theta_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = cost(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = cost(d);
    }
  }
  CircleShift out{theta_at(best), best_cost};
  for (double theta : {a, b, 0.5 * (a + b)}) {
    const double v = cost(theta);
    if (v < out.w2_squared) out = {theta, v};
  }
  return out;
}

inline void require_same_grid(const Space1D& space, const ProbMeasure1D& mu, const char* where) {
  if (!(mu.grid() == space.grid())) {
    throw SpaceMismatch(std::string(where) + ": measure does not live on this space's grid");
  }
}

inline double w2(const Space1D& space, const ProbMeasure1D& mu0, const ProbMeasure1D& mu1) {
  require_same_grid(space, mu0, "w2");
  require_same_grid(space, mu1, "w2");
  const QuantileFn q0 = quantile(mu0);
  const QuantileFn q1 = quantile(mu1);
  if (space.periodic()) return std::sqrt(std::max(0.0, circle_shift(q0, q1, space.circumference()).w2_squared));
  return w2(q0, q1);
}

/// W2 between discrete measures on the space (atoms in canonical coordinates).
inline double w2(const Space1D& space, const DiscreteMeasure1D& mu0, const DiscreteMeasure1D& mu1) {
  const QuantileFn q0 = mu0.quantile();
  const QuantileFn q1 = mu1.quantile();
  if (space.periodic()) return std::sqrt(std::max(0.0, circle_shift(q0, q1, space.circumference()).w2_squared));
  return w2(q0, q1);
}

namespace detail {

inline ProbMeasure1D interpolate_pieces(const Space1D& space, const std::vector<QuantileFn::Piece>& p0,
                                        const std::vector<QuantileFn::Piece>& p1, double t) {
  std::vector<double> cells(space.grid().cells, 0.0);
  for_each_common_piece(p0, p1, [&](double ua, double ub, double xa0, double xb0, double xa1, double xb1) {
    const double xa = (1.0 - t) * xa0 + t * xa1;
    const double xb = (1.0 - t) * xb0 + t * xb1;
    deposit_uniform(space.grid(), cells, std::min(xa, xb), std::max(xa, xb), ub - ua);
  });
  return ProbMeasure1D(space.grid(), std::move(cells));
}

}  // namespace detail

/// mu_t: pushforward of Q_t = (1-t) Q0 + t Q1, re-binned onto the grid with
/// exact mass conservation.
inline ProbMeasure1D displacement_interpolate(const Space1D& space, const ProbMeasure1D& mu0,
                                              const ProbMeasure1D& mu1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("displacement_interpolate: t must lie in [0,1]");
  require_same_grid(space, mu0, "displacement_interpolate");
  require_same_grid(space, mu1, "displacement_interpolate");
  const QuantileFn q0 = quantile(mu0);
  const QuantileFn q1 = quantile(mu1);
  if (space.periodic()) {
    const double theta = circle_shift(q0, q1, space.circumference()).theta;
    return detail::interpolate_pieces(space, q0.pieces(), detail::lifted_pieces(q1.pieces(), theta, space.circumference()), t);
  }
  return detail::interpolate_pieces(space, q0.pieces(), q1.pieces(), t);
}

struct GeodesicOfMeasures {
  ProbMeasure1D mu0;
  ProbMeasure1D mu1;
  std::vector<double> t_grid;
  std::vector<ProbMeasure1D> interpolants;
  double w2;
};

inline GeodesicOfMeasures geodesic(const Space1D& space, const ProbMeasure1D& mu0, const ProbMeasure1D& mu1,
                                   const std::vector<double>& t_grid) {
  require_same_grid(space, mu0, "geodesic");
  require_same_grid(space, mu1, "geodesic");
  const QuantileFn q0 = quantile(mu0);
  const QuantileFn q1 = quantile(mu1);
  const auto p0 = q0.pieces();
  std::vector<QuantileFn::Piece> p1;
  double dist = 0.0;
  if (space.periodic()) {
    const CircleShift shift = circle_shift(q0, q1, space.circumference());
    p1 = detail::lifted_pieces(q1.pieces(), shift.theta, space.circumference());
    dist = std::sqrt(std::max(0.0, shift.w2_squared));
  } else {
    p1 = q1.pieces();
    dist = std::sqrt(std::max(0.0, detail::squared_distance(p0, p1)));
  }
  GeodesicOfMeasures geo{mu0, mu1, t_grid, {}, dist};
  geo.interpolants.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("geodesic: t must lie in [0,1]");
    geo.interpolants.push_back(detail::interpolate_pieces(space, p0, p1, t));
  }
  return geo;
}

/// Ent(mu | m) = integral rho_m log rho_m dm with rho_m = rho e^{f}.
inline double entropy(const ProbMeasure1D& mu, const Space1D& space) {
  require_same_grid(space, mu, "entropy");
  const Grid& g = space.grid();
  const auto& m = mu.cell_mass();
  const double h = g.step();
  double total = 0.0;
  for (std::size_t i = 0; i < g.cells; ++i) {
    if (m[i] <= 0.0) continue;
    const double rho = m[i] / h;
    total += m[i] * std::log(rho) + rho * space.weight().integral(g.edge(i), g.edge(i + 1));
  }
  return total;
}

/// S_N(mu | m) = N - N integral rho_m^{1-1/N} dm.
inline double renyi(const ProbMeasure1D& mu, const Space1D& space, double N) {
  if (!(N > 1.0)) throw std::domain_error("renyi: N must be > 1");
  require_same_grid(space, mu, "renyi");
  const Grid& g = space.grid();
  const auto& m = mu.cell_mass();
  const double h = g.step();
  const double power = 1.0 - 1.0 / N;
  double total = 0.0;
  for (std::size_t i = 0; i < g.cells; ++i) {
    if (m[i] <= 0.0) continue;
    total += std::pow(m[i] / h, power) * space.weight().exp_integral(g.edge(i), g.edge(i + 1), 1.0 / N);
  }
  return N - N * total;
}

}  // namespace curvlab
