#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvlab {

/// Weight f of m = e^{-f} H^1, stored as samples and interpolated linearly
/// in f, so the density is log-linear between samples.
class WeightFn {
 public:
  WeightFn() = default;
  WeightFn(std::vector<double> coords, std::vector<double> values)
      : x_(std::move(coords)), f_(std::move(values)) {
    if (x_.size() != f_.size()) throw std::invalid_argument("WeightFn: coords/f size mismatch");
    if (x_.size() < 2) throw std::invalid_argument("WeightFn: need at least two samples");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(f_[i])) {
        throw std::invalid_argument("WeightFn: non-finite sample at index " + std::to_string(i));
      }
      if (i > 0 && !(x_[i] > x_[i - 1])) {
        throw std::invalid_argument("WeightFn: coords must be strictly increasing (index " +
                                    std::to_string(i) + ")");
      }
    }
    build_mass_table();
  }

  static WeightFn constant(double value, double lo, double hi) {
    return WeightFn({lo, hi}, {value, value});
  }

  /// Samples fn on a uniform grid over [lo, hi] with spacing at most step.
  static WeightFn sample(const std::function<double(double)>& fn, double lo, double hi, double step) {
    if (!(hi > lo) || !(step > 0.0)) throw std::invalid_argument("WeightFn::sample: bad range");
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9));
    std::vector<double> xs(n + 1), fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      xs[i] = (i == n) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
      fs[i] = fn(xs[i]);
    }
    return WeightFn(std::move(xs), std::move(fs));
  }

  const std::vector<double>& coords() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return f_; }
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  std::size_t size() const noexcept { return x_.size(); }

  double operator()(double x) const {
    check_range(x);
    const std::size_t i = segment(x);
    const double w = (x - x_[i]) / (x_[i + 1] - x_[i]);
    return f_[i] + w * (f_[i + 1] - f_[i]);
  }

  /// Integral of e^{-scale f} over [a, b], exact for the interpolant.
  double exp_integral(double a, double b, double scale = 1.0) const {
    if (b < a) return -exp_integral(b, a, scale);
    check_range(a);
    check_range(b);
    if (a == b) return 0.0;
    if (scale == 1.0) return cumulative_mass(b) - cumulative_mass(a);
    const std::size_t ia = segment(a);
    const std::size_t ib = segment(b);
    double total = 0.0;
    for (std::size_t i = ia; i <= ib; ++i) {
      const double lo = std::max(a, x_[i]);
      const double hi = std::min(b, x_[i + 1]);
      if (hi > lo) total += piece_exp(lo, hi, (*this)(lo), (*this)(hi), scale);
    }
    return total;
  }

  /// Integral of f over [a, b], exact for the interpolant.
  double integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    check_range(a);
    check_range(b);
    if (a == b) return 0.0;
    const std::size_t ia = segment(a);
    const std::size_t ib = segment(b);
    double total = 0.0;
    for (std::size_t i = ia; i <= ib; ++i) {
      const double lo = std::max(a, x_[i]);
      const double hi = std::min(b, x_[i + 1]);
      if (hi > lo) total += 0.5 * (hi - lo) * ((*this)(lo) + (*this)(hi));
    }
    return total;
  }

  double max_value() const { return *std::max_element(f_.begin(), f_.end()); }
  double min_value() const { return *std::min_element(f_.begin(), f_.end()); }

  friend bool operator==(const WeightFn& a, const WeightFn& b) { return a.x_ == b.x_ && a.f_ == b.f_; }

 private:
  static double piece_exp(double lo, double hi, double flo, double fhi, double scale) {
    // e^{-s f(lo)} * L * expm1(z)/z with z = -s (f(hi) - f(lo))
    const double z = -scale * (fhi - flo);
    const double phi = std::abs(z) < 1e-12 ? 1.0 + 0.5 * z : std::expm1(z) / z;
    return std::exp(-scale * flo) * (hi - lo) * phi;
  }

  void check_range(double x) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(x_.back() - x_.front()));
    if (!(x >= x_.front() - slack && x <= x_.back() + slack)) {
      throw std::out_of_range("WeightFn: x=" + std::to_string(x) + " outside sampled range [" +
                              std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
    }
  }

  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  void build_mass_table() {
    cum_.assign(x_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      cum_[i + 1] = cum_[i] + piece_exp(x_[i], x_[i + 1], f_[i], f_[i + 1], 1.0);
    }
  }

  double cumulative_mass(double x) const {
    const std::size_t i = segment(x);
    const double xc = std::clamp(x, x_[i], x_[i + 1]);
    if (xc == x_[i]) return cum_[i];
    return cum_[i] + piece_exp(x_[i], xc, f_[i], (*this)(xc), 1.0);
  }

  std::vector<double> x_;
  std::vector<double> f_;
  std::vector<double> cum_;
};

}  // namespace curvlab
