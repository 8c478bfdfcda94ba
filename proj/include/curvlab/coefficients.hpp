#pragma once

// Model-space coefficients: the distortion coefficients sigma^(t)_{K,N}(theta),
// the volume density S_{K,N} and its (N-1)-power antiderivative F.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "curvlab/quadrature.hpp"

namespace curvlab {

/// Curvature bound K (1/length^2) and dimension bound N > 1.
class CurvatureParams {
 public:
  CurvatureParams(double K, double N) : K_(K), N_(N) {
    if (!std::isfinite(K)) throw std::domain_error("CurvatureParams: K must be finite");
    if (!(N > 1.0) || !std::isfinite(N)) {
      throw std::domain_error("CurvatureParams: N must be finite and > 1");
    }
  }

  double K() const noexcept { return K_; }
  double N() const noexcept { return N_; }

  friend bool operator==(const CurvatureParams&, const CurvatureParams&) = default;

 private:
  double K_;
  double N_;
};

/// A real number or +infinity. Never NaN.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  explicit ExtReal(double v) : value_(v) {
    if (std::isnan(v)) throw std::domain_error("ExtReal: NaN");
    if (std::isinf(v)) {
      if (v < 0) throw std::domain_error("ExtReal: -infinity is not representable");
      infinite_ = true;
    }
  }
  static ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    r.value_ = std::numeric_limits<double>::infinity();
    return r;
  }

  bool is_infinite() const noexcept { return infinite_; }
  bool is_finite() const noexcept { return !infinite_; }
  /// Throws if infinite.
  double value() const {
    if (infinite_) throw std::domain_error("ExtReal: value() on +infinity");
    return value_;
  }
  /// The value as a double, +inf for the infinite marker.
  double as_double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

namespace detail {

// Below this |K| theta^2 / N the sin/sinh ratios switch to their Taylor
// expansion in kappa = K theta^2 / N.
inline constexpr double kSeriesThreshold = 1e-8;

// t * sin(t x)/sin(x) ratio expanded in kappa = x^2 (sinh: kappa < 0).
inline double ratio_series(double t, double kappa) {
  const double t2 = t * t;
  return t * (1.0 + (1.0 - t2) * kappa / 6.0 + (1.0 - t2) * (7.0 - 3.0 * t2) * kappa * kappa / 360.0);
}

}  // namespace detail

/// sigma^(t)_{K,N}(theta). Returns +infinity in the conjugate regime
/// K theta^2 >= N pi^2.
inline ExtReal sigma(double t, const CurvatureParams& params, double theta) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("sigma: t must lie in [0,1]");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw std::domain_error("sigma: theta must be >= 0");
  const double K = params.K();
  const double N = params.N();
  const double k_theta2 = K * theta * theta;
  if (k_theta2 >= N * std::numbers::pi * std::numbers::pi) return ExtReal::infinity();
  if (k_theta2 == 0.0) return ExtReal(t);
  const double kappa = k_theta2 / N;
  if (std::abs(kappa) < detail::kSeriesThreshold) return ExtReal(detail::ratio_series(t, kappa));
  const double x = theta * std::sqrt(std::abs(K) / N);
  if (K > 0.0) return ExtReal(std::sin(t * x) / std::sin(x));
  return ExtReal(std::sinh(t * x) / std::sinh(x));
}

/// First positive zero of S_{K,N} for K > 0, +inf otherwise.
inline double conjugate_radius(const CurvatureParams& params) {
  if (params.K() <= 0.0) return std::numeric_limits<double>::infinity();
  return std::numbers::pi * std::sqrt((params.N() - 1.0) / params.K());
}

/// S_{K,N}(t): sqrt((N-1)/K) sin(t sqrt(K/(N-1))), t, or the sinh analogue.
inline double s_vol(const CurvatureParams& params, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("s_vol: t must be >= 0");
  const double K = params.K();
  const double n1 = params.N() - 1.0;
  if (K == 0.0) return t;
  const double kappa = K * t * t / n1;
  if (std::abs(kappa) < detail::kSeriesThreshold) {
    return t * (1.0 - kappa / 6.0 + kappa * kappa / 120.0);
  }
  const double c = std::sqrt(std::abs(K) / n1);
  if (K > 0.0) return std::sin(t * c) / c;
  return std::sinh(t * c) / c;
}

/// S_{K,N}(t)^{N-1}; the derivative F'(t) of f_vol. Clamped at zero past the
/// first zero of S.
inline double s_vol_power(const CurvatureParams& params, double t) {
  const double s = s_vol(params, t);
  if (s <= 0.0) return 0.0;
  return std::pow(s, params.N() - 1.0);
}

/// F(r) = integral_0^r S_{K,N}(s)^{N-1} ds by adaptive Simpson. The default
/// tolerance is purely relative: F spans hundreds of decades as N grows.
inline double f_vol(const CurvatureParams& params, double r, QuadratureOptions opts = {0.0, 1e-13, 40}) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::domain_error("f_vol: r must be >= 0");
  if (r > conjugate_radius(params)) {
    throw std::domain_error("f_vol: r exceeds the conjugate radius pi*sqrt((N-1)/K)");
  }
  if (r == 0.0) return 0.0;
  return integrate([&](double s) { return s_vol_power(params, s); }, 0.0, r, opts);
}

}  // namespace curvlab
