#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "curvlab/rng.hpp"
#include "curvlab/space1d.hpp"
#include "quad_oracle.hpp"

using namespace curvlab;

namespace {

constexpr double kPi = std::numbers::pi;

Space1D flat_line(double L = 5.0) { return Space1D(Line{}, WeightFn::constant(0.0, -L, L), 1e-3, {{-L, L}}); }
Space1D flat_halfline(double L = 5.0) { return Space1D(HalfLine{}, WeightFn::constant(0.0, 0.0, L), 1e-3, {{0.0, L}}); }
Space1D linear_interval() { return Space1D(Interval{1.0}, WeightFn({0.0, 1.0}, {0.0, 1.0})); }
Space1D flat_circle(double r = 1.0) { return Space1D(Circle{r}, WeightFn::constant(0.0, 0.0, 2 * kPi * r)); }

// Smooth random weight sampled on `knots` nodes.
WeightFn random_weight(SplitRng& rng, double lo, double hi, int knots, bool periodic) {
  const double a1 = rng.uniform(-1, 1), a2 = rng.uniform(-0.5, 0.5), ph = rng.uniform(0, 6.28);
  const double period = hi - lo;
  return WeightFn::sample(
      [&](double x) {
        const double u = 2 * kPi * (x - lo) / period;
        return periodic ? a1 * std::sin(u + ph) + a2 * std::cos(2 * u) : a1 * std::sin(1.3 * x + ph) + a2 * x;
      },
      lo, hi, (hi - lo) / knots);
}

std::vector<Space1D> random_spaces(SplitRng& rng) {
  std::vector<Space1D> out;
  out.emplace_back(Line{}, random_weight(rng, -3, 3, 25, false), 1e-3, std::pair{-3.0, 3.0});
  out.emplace_back(HalfLine{}, random_weight(rng, 0, 4, 25, false), 1e-3, std::pair{0.0, 4.0});
  out.emplace_back(Interval{2.5}, random_weight(rng, 0, 2.5, 25, false));
  out.emplace_back(Circle{0.8}, random_weight(rng, 0, 2 * kPi * 0.8, 25, true));
  return out;
}

// Romberg on pieces split at the given breakpoints.
template <class F>
double piecewise_romberg(F&& f, double a, double b, std::vector<double> cuts) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::max(a, cuts[i]);
    const double hi = std::min(b, cuts[i + 1]);
    // evaluate strictly inside each piece so jumps at the cuts are one-sided
    const double pad = 1e-9 * std::max(1.0, std::abs(hi));
    auto inside = [&](double x) { return f(std::clamp(x, lo + pad, hi - pad)); };
    if (hi > lo) total += oracle::romberg(inside, lo, hi, 14);
  }
  return total;
}

// Infimum of m(B_r(x))/r over balls with |x - y| <= r <= delta, over a scan.
double cover_ratio_inf(const Space1D& s, double y, double delta) {
  double best = std::numeric_limits<double>::infinity();
  constexpr int kR = 40, kX = 40;
  for (int i = 1; i <= kR; ++i) {
    const double r = delta * i / kR;
    for (int j = -kX; j <= kX; ++j) {
      double x = y + r * j / kX;
      if (!s.periodic() && (x < s.lo() || x > s.hi())) continue;
      try {
        best = std::min(best, s.measure_ball(x, r) / r);
      } catch (const std::out_of_range&) {
      }
    }
  }
  return best;
}

// delta -> 0 limit of the cover-infimum definition, Richardson on delta in
// {1e-2, 1e-3, 1e-4}.
double cover_limit(const Space1D& s, double x0, double t) {
  std::vector<double> v;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    double sum = 0.0;
    for (double y : s.sphere_points(x0, t)) sum += cover_ratio_inf(s, y, delta);
    v.push_back(sum);
  }
  return (10.0 * v[2] - v[1]) / 9.0;
}

}  // namespace

TEST(MeasureBall, Examples) {
  EXPECT_NEAR(flat_line().measure_ball(0.0, 3.0), 6.0, 1e-12);
  EXPECT_NEAR(flat_halfline().measure_ball(0.0, 2.0), 2.0, 1e-12);
  const double want = std::exp(-0.25) - std::exp(-0.75);
  EXPECT_NEAR(linear_interval().measure_ball(0.5, 0.25), want, 1e-14);
  EXPECT_NEAR(oracle::romberg([](double x) { return std::exp(-x); }, 0.25, 0.75), want, 1e-13);
}

TEST(MeasureBall, CircleCapsAtTotalMass) {
  const auto c = flat_circle();
  EXPECT_NEAR(c.measure_ball(0.3, kPi), 2 * kPi, 1e-12);
  EXPECT_NEAR(c.measure_ball(0.3, 10.0), 2 * kPi, 1e-12);
  EXPECT_NEAR(c.measure_ball(6.0, 1.0), 2.0, 1e-12);
}

TEST(MeasureBall, CircleSymmetryForConstantWeight) {
  const auto c = Space1D(Circle{1.3}, WeightFn::constant(0.7, 0.0, 2 * kPi * 1.3));
  const double ref = c.measure_ball(0.0, 1.1);
  for (double x = 0.0; x < 2 * kPi * 1.3; x += 0.37) EXPECT_NEAR(c.measure_ball(x, 1.1), ref, 1e-12);
}

TEST(MeasureBall, MonotoneAndLipschitzInRadius) {
  SplitRng rng(3);
  for (const auto& s : random_spaces(rng)) {
    const double x = s.periodic() ? 1.0 : 0.5 * (s.lo() + s.hi());
    const double sup_density = std::exp(-s.weight().min_value());
    double prev = 0.0;
    double prev_r = 0.0;
    for (double r = 0.01; r < s.max_radius(x); r += 0.01) {
      const double m = s.measure_ball(x, r);
      EXPECT_GE(m, prev);
      EXPECT_LE(m - prev, 2.0 * sup_density * (r - prev_r) + 1e-12);
      prev = m;
      prev_r = r;
    }
  }
}

TEST(MeasureBall, AgreesWithQuadratureOracle) {
  SplitRng rng(5);
  for (const auto& s : random_spaces(rng)) {
    if (s.periodic()) continue;
    const double x = 0.5 * (s.lo() + s.hi());
    const double r = 0.4 * s.max_radius(x);
    const double want =
        piecewise_romberg([&](double y) { return s.density(y); }, std::max(s.lo(), x - r), x + r, s.weight().coords());
    EXPECT_NEAR(s.measure_ball(x, r), want, 1e-11);
  }
}

TEST(MeasureBall, WindowExitFailsLoudly) {
  EXPECT_THROW(flat_line(2.0).measure_ball(1.5, 1.0), std::out_of_range);
  EXPECT_THROW(flat_halfline(2.0).measure_ball(1.5, 1.0), std::out_of_range);
  EXPECT_THROW(flat_line(2.0).measure_ball(3.0, 0.1), std::out_of_range);
  EXPECT_THROW(linear_interval().measure_ball(1.5, 0.1), std::domain_error);
  EXPECT_NO_THROW(linear_interval().measure_ball(0.9, 5.0));
}

TEST(BoundaryMeasure, ClosedFormExamples) {
  EXPECT_NEAR(flat_line().boundary_measure(0.0, 1.0), 4.0, 1e-14);
  EXPECT_NEAR(flat_halfline().boundary_measure(0.0, 1.0), 2.0, 1e-14);
  EXPECT_NEAR(flat_circle().boundary_measure(0.0, kPi), 2.0, 1e-14);
  EXPECT_EQ(flat_circle().sphere_points(0.0, kPi).size(), 1u);
}

TEST(BoundaryMeasure, MatchesCoverInfimumLimit) {
  EXPECT_NEAR(cover_limit(flat_line(), 0.0, 1.0), 4.0, 1e-6);
  EXPECT_NEAR(cover_limit(flat_halfline(), 0.0, 1.0), 2.0, 1e-6);
  EXPECT_NEAR(cover_limit(flat_circle(), 0.0, kPi), 2.0, 1e-6);
  // weighted: interior points and a domain endpoint
  const auto iv = linear_interval();
  EXPECT_NEAR(cover_limit(iv, 0.5, 0.2), iv.boundary_measure(0.5, 0.2), 1e-5);
  EXPECT_NEAR(cover_limit(iv, 0.3, 0.7), iv.boundary_measure(0.3, 0.7), 1e-5);
  EXPECT_NEAR(iv.boundary_measure(0.3, 0.7), std::exp(-1.0), 1e-14);
  SplitRng rng(9);
  for (const auto& s : random_spaces(rng)) {
    const double x = s.periodic() ? 0.4 : 0.5 * (s.lo() + s.hi());
    const double t = 0.5 * s.max_radius(x);
    EXPECT_NEAR(cover_limit(s, x, t), s.boundary_measure(x, t), 2e-5);
  }
}

TEST(BoundaryMeasure, EmptySphereIsAnError) {
  EXPECT_THROW(linear_interval().boundary_measure(0.5, 0.6), std::domain_error);
  EXPECT_THROW(flat_circle().boundary_measure(0.0, 3.5), std::domain_error);
  EXPECT_THROW(flat_line().boundary_measure(0.0, 0.0), std::domain_error);
}

TEST(Disintegrate, Examples) {
  const auto a = flat_line().disintegrate(0.0, 2.0);
  ASSERT_EQ(a.atoms.size(), 2u);
  EXPECT_DOUBLE_EQ(a.atoms[0].coord, -2.0);
  EXPECT_DOUBLE_EQ(a.atoms[1].coord, 2.0);
  EXPECT_DOUBLE_EQ(a.atoms[0].mass, 1.0);
  const auto b = flat_halfline().disintegrate(0.0, 2.0);
  ASSERT_EQ(b.atoms.size(), 1u);
  EXPECT_DOUBLE_EQ(b.atoms[0].coord, 2.0);
  const auto iv = linear_interval();
  const auto c = iv.disintegrate(0.0, 0.3);
  ASSERT_EQ(c.atoms.size(), 1u);
  EXPECT_NEAR(c.atoms[0].mass, std::exp(-0.3), 1e-15);
  const double integral = oracle::romberg([&](double r) { return iv.disintegrate(0.0, r).total(); }, 0.0, 0.5);
  EXPECT_NEAR(integral, iv.measure_ball(0.0, 0.5), 1e-10);
  EXPECT_TRUE(iv.disintegrate(0.5, 0.8).atoms.empty());
}

TEST(Disintegrate, ReproducesBallMassesOnRandomSpaces) {
  SplitRng rng(21);
  for (int rep = 0; rep < 3; ++rep) {
    for (const auto& s : random_spaces(rng)) {
      for (int k = 0; k < 5; ++k) {
        const double lo = s.periodic() ? 0.0 : s.lo();
        const double hi = s.periodic() ? s.circumference() : s.hi();
        const double o = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo));
        const double reach = std::min(s.max_radius(o), s.periodic() ? 0.5 * s.circumference() : 1e9);
        const double r1 = rng.uniform(0.0, 0.5 * reach);
        const double r2 = rng.uniform(r1, reach);
        std::vector<double> cuts;
        for (double c : s.weight().coords()) cuts.push_back(s.distance(c, o));
        cuts.push_back(std::abs(o - s.lo()));
        cuts.push_back(std::abs(s.hi() - o));
        const double got =
            piecewise_romberg([&](double r) { return s.disintegrate(o, r).total(); }, r1, r2, cuts);
        const double want = s.measure_ball(o, r2) - s.measure_ball(o, r1);
        EXPECT_NEAR(got, want, 1e-8 * std::max(1.0, std::abs(want))) << topology_name(s.topology());
      }
    }
  }
}

TEST(Rescale, NormalizationExamples) {
  const auto line = flat_line();
  const auto r1 = line.rescale(0.0, 1.0);
  EXPECT_NEAR(r1.normalization, 1.0, 1e-12);
  EXPECT_NEAR(r1.measure_ball(0.0, 1.0), 2.0, 1e-12);
  const auto r2 = line.rescale(0.0, 2.0);
  EXPECT_NEAR(r2.normalization, oracle::romberg([](double u) { return 1.0 - std::abs(u) / 2.0; }, -2.0, 2.0), 1e-12);
  EXPECT_NEAR(r2.normalization, 2.0, 1e-12);
  EXPECT_NEAR(r2.distance(0.0, 1.0), 0.5, 1e-15);
}

TEST(Rescale, WeightedNormalizationAgreesWithAveragedBalls) {
  SplitRng rng(4);
  for (const auto& s : random_spaces(rng)) {
    const double x = s.periodic() ? 2.0 : 0.5 * (s.lo() + s.hi());
    for (double r : {0.1, 0.6, 1.2}) {
      if (!s.periodic() && r > s.max_radius(x) && s.has_window()) continue;
      const auto rs = s.rescale(x, r);
      // (1/r) integral_0^r m(B_s(x)) ds equals the tent integral
      std::vector<double> cuts;
      for (double c : s.weight().coords()) cuts.push_back(s.distance(c, x));
      const double want = piecewise_romberg([&](double q) { return s.measure_ball(x, q); }, 0.0, r, cuts) / r;
      EXPECT_NEAR(rs.normalization, want, 1e-9);
      EXPECT_NEAR(rs.measure_ball(x, 0.5), s.measure_ball(x, 0.5 * r) / rs.normalization, 1e-14);
    }
  }
  EXPECT_THROW(flat_line().rescale(0.0, 0.0), std::domain_error);
}

TEST(Space1D, Validation) {
  EXPECT_THROW(Space1D(Line{}, WeightFn::constant(0, -1, 1)), std::invalid_argument);
  EXPECT_THROW(Space1D(Interval{2.0}, WeightFn::constant(0, 0, 1)), std::invalid_argument);
  EXPECT_THROW(Space1D(Circle{1.0}, WeightFn({0, 3, 2 * kPi}, {0, 1, 1})), std::invalid_argument);
  EXPECT_THROW(Space1D(Interval{0.0}, WeightFn::constant(0, 0, 1)), std::invalid_argument);
  EXPECT_THROW(WeightFn({0, 0}, {1, 1}), std::invalid_argument);
  EXPECT_THROW(WeightFn({0, 1}, {1, std::nan("")}), std::invalid_argument);
}

TEST(Space1D, CircleDistanceIsArcLength) {
  const auto c = flat_circle(2.0);
  EXPECT_NEAR(c.distance(0.1, 2 * kPi * 2.0 - 0.1), 0.2, 1e-12);
  EXPECT_NEAR(c.distance(0.0, 2 * kPi), 2 * kPi, 1e-12);
  EXPECT_NEAR(c.geodesic_point(0.2, 12.4, 0.5), c.canonical(0.5 * (0.2 + 12.4 - 4 * kPi)), 1e-12);
}

TEST(WeightFn, ExactExponentialIntegrals) {
  const WeightFn w({0.0, 0.5, 2.0}, {0.0, 1.0, -1.0});
  auto f = [&](double x) { return std::exp(-0.5 * w(x)); };
  EXPECT_NEAR(w.exp_integral(0.1, 1.7, 0.5),
              oracle::romberg(f, 0.1, 0.5) + oracle::romberg(f, 0.5, 1.7), 1e-13);
  EXPECT_NEAR(w.integral(0.0, 2.0), 0.25 + 0.0, 1e-15);
  EXPECT_THROW(w(2.5), std::out_of_range);
}
