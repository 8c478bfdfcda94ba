#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <utility>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "curvlab/quadrature.hpp"
#include "curvlab/weight_fn.hpp"

namespace curvlab {

struct Line {
  friend bool operator==(const Line&, const Line&) = default;
};
struct HalfLine {
  friend bool operator==(const HalfLine&, const HalfLine&) = default;
};
struct Interval {
  double length = 1.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};
struct Circle {
  double radius = 1.0;
  friend bool operator==(const Circle&, const Circle&) = default;
};

using Topology1D = std::variant<Line, HalfLine, Interval, Circle>;

inline std::string topology_name(const Topology1D& topo) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Line>) return "line";
        else if constexpr (std::is_same_v<T, HalfLine>) return "halfline";
        else if constexpr (std::is_same_v<T, Interval>) return "interval";
        else return "circle";
      },
      topo);
}

/// Uniform cell partition of the working range. Two measures can only be
/// compared when their grids agree.
struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t cells = 1;
  bool periodic = false;

  double step() const { return (hi - lo) / static_cast<double>(cells); }
  double edge(std::size_t i) const {
    return i == cells ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
  }
  double center(std::size_t i) const { return 0.5 * (edge(i) + edge(i + 1)); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct SphereAtom {
  double coord;
  double mass;
};

struct SphereMeasure {
  double origin;
  double radius;
  std::vector<SphereAtom> atoms;

  double total() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass;
    return s;
  }
};

/// Which arc a circle geodesic follows when the endpoints are antipodal.
enum class Arc { Shorter, Positive, Negative };

class Space1D;

struct RescaledSpace;

/// A model space (X, d, e^{-f} H^1). Immutable after construction.
///
/// Line and HalfLine carry a working window; any ball, sphere or geodesic that
/// leaves the window raises std::out_of_range instead of extrapolating.
class Space1D {
 public:
  Space1D(Topology1D topology, WeightFn weight, double grid_step = 1e-3,
          std::optional<std::pair<double, double>> window = std::nullopt)
      : topo_(topology), weight_(std::move(weight)), grid_step_(grid_step) {
    if (!(grid_step_ > 0.0) || !std::isfinite(grid_step_)) {
      throw std::invalid_argument("Space1D: grid_step must be positive");
    }
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, Line>) {
            if (!window) throw std::invalid_argument("Space1D: line requires a working window");
            lo_ = window->first;
            hi_ = window->second;
          } else if constexpr (std::is_same_v<T, HalfLine>) {
            if (!window) throw std::invalid_argument("Space1D: halfline requires a working window");
            if (window->first != 0.0) {
              throw std::invalid_argument("Space1D: halfline window must start at 0");
            }
            lo_ = 0.0;
            hi_ = window->second;
          } else if constexpr (std::is_same_v<T, Interval>) {
            if (!(t.length > 0.0)) throw std::invalid_argument("Space1D: interval length must be > 0");
            lo_ = 0.0;
            hi_ = t.length;
          } else {
            if (!(t.radius > 0.0)) throw std::invalid_argument("Space1D: circle radius must be > 0");
            lo_ = 0.0;
            hi_ = 2.0 * std::numbers::pi * t.radius;
          }
        },
        topo_);
    if (!(hi_ > lo_) || !std::isfinite(lo_) || !std::isfinite(hi_)) {
      throw std::invalid_argument("Space1D: empty or non-finite working window");
    }
    const double slack = 1e-9 * (hi_ - lo_);
    if (weight_.lo() > lo_ + slack || weight_.hi() < hi_ - slack) {
      throw std::invalid_argument("Space1D: weight samples do not cover the working range");
    }
    if (periodic()) {
      const double mismatch = std::abs(weight_(lo_) - weight_(hi_));
      if (mismatch > 1e-9 * std::max(1.0, std::abs(weight_(lo_)))) {
        throw std::invalid_argument("Space1D: circle weight is not periodic (f(0) != f(2 pi r))");
      }
    }
    const auto cells = static_cast<std::size_t>(std::ceil((hi_ - lo_) / grid_step_ - 1e-9));
    grid_ = Grid{lo_, hi_, std::max<std::size_t>(cells, 1), periodic()};
  }

  const Topology1D& topology() const noexcept { return topo_; }
  const WeightFn& weight() const noexcept { return weight_; }
  double grid_step() const noexcept { return grid_step_; }
  const Grid& grid() const noexcept { return grid_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  bool periodic() const noexcept { return std::holds_alternative<Circle>(topo_); }
  double circumference() const { return periodic() ? hi_ - lo_ : std::numeric_limits<double>::infinity(); }
  bool has_window() const noexcept {
    return std::holds_alternative<Line>(topo_) || std::holds_alternative<HalfLine>(topo_);
  }

  /// Canonical coordinate: wraps onto [0, C) on a circle, validates otherwise.
  double canonical(double x) const {
    if (!std::isfinite(x)) throw std::domain_error("Space1D: non-finite coordinate");
    if (periodic()) {
      const double c = circumference();
      double y = std::fmod(x, c);
      if (y < 0.0) y += c;
      if (y >= c) y -= c;
      return y;
    }
    const double slack = 1e-12 * (hi_ - lo_);
    if (x < lo_ - slack || x > hi_ + slack) {
      if (has_window()) {
        throw std::out_of_range("Space1D: coordinate " + std::to_string(x) + " outside working window");
      }
      throw std::domain_error("Space1D: coordinate " + std::to_string(x) + " outside domain");
    }
    return std::clamp(x, lo_, hi_);
  }

  double f(double x) const { return weight_(canonical(x)); }
  double density(double x) const { return std::exp(-f(x)); }

  double distance(double x, double y) const {
    const double a = canonical(x);
    const double b = canonical(y);
    const double d = std::abs(a - b);
    return periodic() ? std::min(d, circumference() - d) : d;
  }

  /// Point at fraction t along the geodesic from x0 to x1.
  double geodesic_point(double x0, double x1, double t, Arc arc = Arc::Shorter) const {
    const double a = canonical(x0);
    const double b = canonical(x1);
    if (!periodic()) return canonical((1.0 - t) * a + t * b);
    return canonical(a + t * signed_displacement(a, b, arc));
  }

  /// Displacement from x0 to x1 along the chosen arc (circle) or the line.
  double signed_displacement(double x0, double x1, Arc arc = Arc::Shorter) const {
    const double a = canonical(x0);
    const double b = canonical(x1);
    if (!periodic()) return b - a;
    const double c = circumference();
    double delta = b - a;
    if (delta > 0.5 * c) delta -= c;
    if (delta < -0.5 * c) delta += c;
    if (std::abs(std::abs(delta) - 0.5 * c) <= 1e-12 * c) {
      if (arc == Arc::Positive) delta = 0.5 * c;
      if (arc == Arc::Negative) delta = -0.5 * c;
    }
    return delta;
  }

  bool is_antipodal(double x0, double x1) const {
    if (!periodic()) return false;
    return std::abs(distance(x0, x1) - 0.5 * circumference()) <= 1e-12 * circumference();
  }

  /// Mass of the coordinate interval [a, b] (a <= b, inside the working range).
  double mass_between(double a, double b) const { return weight_.exp_integral(a, b); }

  double total_mass() const { return mass_between(lo_, hi_); }

  /// m(B_r(x)).
  double measure_ball(double x, double r) const {
    if (!(r >= 0.0)) throw std::domain_error("measure_ball: r must be >= 0");
    const double c = canonical(x);
    if (r == 0.0) return 0.0;
    if (periodic()) {
      const double circ = circumference();
      if (2.0 * r >= circ) return total_mass();
      return arc_mass(c - r, c + r);
    }
    const auto [a, b] = ball_range(c, r);
    return mass_between(a, b);
  }

  /// Points y with d(x, y) = t. At most two.
  std::vector<double> sphere_points(double x, double t) const {
    if (!(t >= 0.0)) throw std::domain_error("sphere_points: t must be >= 0");
    const double c = canonical(x);
    std::vector<double> pts;
    if (t == 0.0) {
      pts.push_back(c);
      return pts;
    }
    if (periodic()) {
      const double circ = circumference();
      const double eps = 1e-12 * circ;
      if (t > 0.5 * circ + eps) return pts;
      if (std::abs(t - 0.5 * circ) <= eps) {
        pts.push_back(canonical(c + 0.5 * circ));
        return pts;
      }
      pts.push_back(canonical(c - t));
      pts.push_back(canonical(c + t));
      return pts;
    }
    const double left = c - t;
    const double right = c + t;
    const bool open_left = std::holds_alternative<Line>(topo_);
    const bool open_right = has_window();
    if (left >= lo_ - 1e-12 * (hi_ - lo_)) {
      pts.push_back(std::max(left, lo_));
    } else if (open_left) {
      throw std::out_of_range("sphere_points: sphere leaves the working window");
    }
    if (right <= hi_ + 1e-12 * (hi_ - lo_)) {
      pts.push_back(std::min(right, hi_));
    } else if (open_right) {
      throw std::out_of_range("sphere_points: sphere leaves the working window");
    }
    return pts;
  }

  /// True if y is an endpoint of the space itself (not of a working window).
  bool is_domain_endpoint(double y) const {
    const double eps = 1e-12 * (hi_ - lo_);
    if (std::holds_alternative<HalfLine>(topo_)) return std::abs(y - lo_) <= eps;
    if (std::holds_alternative<Interval>(topo_)) return std::abs(y - lo_) <= eps || std::abs(y - hi_) <= eps;
    return false;
  }

  /// m_{-1}(dB_t(x0)) in closed form: 2 e^{-f} per interior sphere point,
  /// e^{-f} per domain endpoint.
  double boundary_measure(double x0, double t) const {
    if (!(t > 0.0)) throw std::domain_error("boundary_measure: t must be > 0");
    const auto pts = sphere_points(x0, t);
    if (pts.empty()) throw std::domain_error("boundary_measure: sphere is empty");
    double total = 0.0;
    for (double y : pts) total += (is_domain_endpoint(y) ? 1.0 : 2.0) * density(y);
    return total;
  }

  /// Conditional measures m_r of m on spheres around origin.
  SphereMeasure disintegrate(double origin, double r) const {
    if (!(r >= 0.0)) throw std::domain_error("disintegrate: r must be >= 0");
    SphereMeasure out{canonical(origin), r, {}};
    for (double y : sphere_points(origin, r)) out.atoms.push_back({y, density(y)});
    return out;
  }

  RescaledSpace rescale(double x, double r) const;

  /// Largest radius for which balls around x stay inside the working range.
  double max_radius(double x) const {
    const double c = canonical(x);
    if (periodic()) return 0.5 * circumference();
    if (std::holds_alternative<Line>(topo_)) return std::min(c - lo_, hi_ - c);
    if (std::holds_alternative<HalfLine>(topo_)) return hi_ - c;
    return std::max(c - lo_, hi_ - c);
  }

 private:
  double arc_mass(double a, double b) const {
    const double circ = circumference();
    if (a < lo_) return mass_between(a + circ, hi_) + mass_between(lo_, b);
    if (b > hi_) return mass_between(a, hi_) + mass_between(lo_, b - circ);
    return mass_between(a, b);
  }

  std::pair<double, double> ball_range(double c, double r) const {
    double a = c - r;
    double b = c + r;
    const double slack = 1e-12 * (hi_ - lo_);
    if (std::holds_alternative<Line>(topo_) && a < lo_ - slack) {
      throw std::out_of_range("measure_ball: ball leaves the working window on the left");
    }
    if (has_window() && b > hi_ + slack) {
      throw std::out_of_range("measure_ball: ball leaves the working window on the right");
    }
    return {std::max(a, lo_), std::min(b, hi_)};
  }

  Topology1D topo_;
  WeightFn weight_;
  double grid_step_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  Grid grid_;
};

/// (X, d/r, m^x_r) with m^x_r = m / normalization.
struct RescaledSpace {
  const Space1D* base;
  double center;
  double scale;
  double normalization;

  double distance(double x, double y) const { return base->distance(x, y) / scale; }
  double measure_ball(double x, double s) const { return base->measure_ball(x, scale * s) / normalization; }
};

inline RescaledSpace Space1D::rescale(double x, double r) const {
  if (!(r > 0.0)) throw std::domain_error("rescale: r must be > 0");
  const double c = canonical(x);
  // integral over the ball of (1 - |u|/r) e^{-f(c+u)}, split at the center
  double left = r;
  double right = r;
  if (periodic()) {
    left = right = std::min(r, 0.5 * circumference());
  } else {
    const auto [a, b] = ball_range(c, r);
    left = c - a;
    right = b - c;
  }
  auto integrand = [&](double u) { return (1.0 - std::abs(u) / r) * density(c + u); };
  QuadratureOptions opts{1e-13 * std::max(1.0, r), 1e-13, 40};
  const double norm = integrate(integrand, -left, 0.0, opts) + integrate(integrand, 0.0, right, opts);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::underflow_error("rescale: normalization underflowed");
  }
  return RescaledSpace{this, c, r, norm};
}

}  // namespace curvlab
