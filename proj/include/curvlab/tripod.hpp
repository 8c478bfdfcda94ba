#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace curvlab {

/// Point on a tripod edge, s = distance from the center. The center is
/// stored as edge 0, s = 0.
struct TripodPoint {
  int edge = 0;
  double s = 0.0;

  static TripodPoint center() { return {0, 0.0}; }
  TripodPoint canonical() const { return s == 0.0 ? TripodPoint{0, 0.0} : *this; }

  friend bool operator==(const TripodPoint& a, const TripodPoint& b) {
    const TripodPoint ca = a.canonical();
    const TripodPoint cb = b.canonical();
    return ca.edge == cb.edge && ca.s == cb.s;
  }
};

/// Three segments glued at one end; per-edge constant density (unit by
/// default).
class Tripod {
 public:
  explicit Tripod(std::array<double, 3> edge_lengths = {1.0, 1.0, 1.0},
                  std::array<double, 3> densities = {1.0, 1.0, 1.0}, double grid_step = 1e-3)
      : len_(edge_lengths), rho_(densities), grid_step_(grid_step) {
    for (int e = 0; e < 3; ++e) {
      if (!(len_[e] > 0.0) || !std::isfinite(len_[e])) throw std::invalid_argument("Tripod: edge lengths must be > 0");
      if (!(rho_[e] > 0.0) || !std::isfinite(rho_[e])) throw std::invalid_argument("Tripod: densities must be > 0");
    }
    if (!(grid_step_ > 0.0)) throw std::invalid_argument("Tripod: grid_step must be > 0");
  }

  double edge_length(int e) const { return len_.at(static_cast<std::size_t>(e)); }
  double edge_density(int e) const { return rho_.at(static_cast<std::size_t>(e)); }
  double grid_step() const noexcept { return grid_step_; }

  void validate(const TripodPoint& p) const {
    if (p.edge < 0 || p.edge > 2) throw std::invalid_argument("TripodPoint: edge must be 0, 1 or 2");
    if (!(p.s >= 0.0) || p.s > edge_length(p.edge) * (1.0 + 1e-12)) {
      throw std::domain_error("TripodPoint: s outside [0, edge length]");
    }
  }

  double distance(const TripodPoint& p, const TripodPoint& q) const {
    validate(p);
    validate(q);
    const TripodPoint a = p.canonical();
    const TripodPoint b = q.canonical();
    return a.edge == b.edge ? std::abs(a.s - b.s) : a.s + b.s;
  }

  /// m(B_r(p)).
  double measure_ball(const TripodPoint& p, double r) const {
    validate(p);
    if (!(r >= 0.0)) throw std::domain_error("Tripod::measure_ball: r must be >= 0");
    const TripodPoint c = p.canonical();
    double total = 0.0;
    // along the own edge
    const double lo = std::max(0.0, c.s - r);
    const double hi = std::min(edge_length(c.edge), c.s + r);
    total += edge_density(c.edge) * (hi - lo);
    // through the center into the other two edges
    const double reach = r - c.s;
    if (reach > 0.0) {
      for (int e = 0; e < 3; ++e) {
        if (e == c.edge) continue;
        total += edge_density(e) * std::min(edge_length(e), reach);
      }
    }
    return total;
  }

  double total_mass() const {
    return rho_[0] * len_[0] + rho_[1] * len_[1] + rho_[2] * len_[2];
  }

 private:
  std::array<double, 3> len_;
  std::array<double, 3> rho_;
  double grid_step_;
};

}  // namespace curvlab
