#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "curvlab/branching.hpp"
#include "curvlab/rng.hpp"

using namespace curvlab;

namespace {

// Closed-form description of the symmetric construction. Every geodesic runs
// from (edge 0, D) to (edge e, s) and sits at unrolled coordinate -D + t (D + s).
struct Closed {
  double D, s_lo, s_hi;
  explicit Closed(const BranchingScenario& sc) {
    D = sc.eta * std::min(1.0, sc.a / (1.0 - sc.a));
    s_hi = D * (1.0 - sc.a) / sc.a;
    s_lo = D * (1.0 - sc.a - sc.eps) / (sc.a + sc.eps);
  }
  double w() const { return s_hi - s_lo; }
  double lo(double t) const { return -D + t * (D + s_lo); }
  double hi(double t) const { return -D + t * (D + s_hi); }
  double edge0_fraction(double t) const {
    const double len = t * w();
    return std::clamp(std::min(hi(t), 0.0) - lo(t), 0.0, len) / len;
  }
  // Ent of the normalized mixed measure, unit edge densities
  double mixed_entropy(double t) const {
    const double len = t * w();
    const double q = edge0_fraction(t);
    return -std::log(len) - (1.0 - q) * std::numbers::ln2;
  }
  double renyi(double t, double N) const {
    const double len = t * w();
    const double q = edge0_fraction(t);
    // edge-0 part has density 1/len, each branch part 1/(2 len)
    return q * len * std::pow(1.0 / len, 1.0 - 1.0 / N) + (1.0 - q) * 2.0 * len * std::pow(0.5 / len, 1.0 - 1.0 / N);
  }
};

BranchingScenario symmetric(double eps, double beta = 0.5) {
  BranchingScenario sc;
  sc.eps = eps;
  sc.beta = beta;
  return sc;
}

BranchingScenario random_scenario(SplitRng& rng) {
  BranchingScenario sc;
  sc.a = rng.uniform(0.2, 0.8);
  sc.b = rng.uniform(0.05, 0.9) * sc.a;
  sc.eps = rng.uniform(0.05, 0.9) * (1.0 - sc.a);
  sc.eta = rng.uniform(0.2, 0.9);
  sc.beta = rng.uniform(0.1, 1.0);
  return sc;
}

}  // namespace

TEST(Tripod, DistanceExamples) {
  const Tripod T;
  EXPECT_DOUBLE_EQ(T.distance({0, 0.2}, {0, 0.7}), 0.5);
  EXPECT_DOUBLE_EQ(T.distance({0, 0.3}, {1, 0.4}), 0.7);
  EXPECT_EQ(T.distance({2, 0.6}, {2, 0.6}), 0.0);
  EXPECT_EQ(T.distance({1, 0.0}, {2, 0.0}), 0.0);
  EXPECT_EQ(TripodPoint({2, 0.0}), TripodPoint::center());
  EXPECT_THROW(T.distance({3, 0.1}, {0, 0.0}), std::invalid_argument);
  EXPECT_THROW(T.distance({0, 1.5}, {0, 0.0}), std::domain_error);
  EXPECT_THROW(Tripod({1.0, 0.0, 1.0}), std::invalid_argument);
}

TEST(Tripod, MetricAxioms) {
  const Tripod T({1.0, 0.6, 2.0});
  SplitRng rng(101);
  auto point = [&] {
    const int e = static_cast<int>(rng.below(3));
    const double s = rng.uniform(0.0, T.edge_length(e));
    return TripodPoint{e, s};
  };
  for (int i = 0; i < 2000; ++i) {
    const TripodPoint p = point();
    const TripodPoint q = point();
    const TripodPoint r = point();
    EXPECT_EQ(T.distance(p, q), T.distance(q, p));
    EXPECT_LE(T.distance(p, r), T.distance(p, q) + T.distance(q, r) + 1e-15);
  }
}

TEST(Tripod, BallMeasureClosedForm) {
  const Tripod T({1.0, 0.6, 2.0}, {1.0, 2.0, 0.5});
  EXPECT_DOUBLE_EQ(T.measure_ball(TripodPoint::center(), 0.5), 0.5 + 1.0 + 0.25);
  EXPECT_DOUBLE_EQ(T.measure_ball(TripodPoint::center(), 5.0), T.total_mass());
  // (0, 0.3) with r = 0.5: [0, 0.8] on edge 0, 0.2 into each other edge
  EXPECT_NEAR(T.measure_ball({0, 0.3}, 0.5), 0.8 + 2.0 * 0.2 + 0.5 * 0.2, 1e-15);
  EXPECT_NEAR(T.measure_ball({1, 0.5}, 0.2), 2.0 * (0.6 - 0.3), 1e-15);
  EXPECT_NEAR(Tripod().measure_ball(TripodPoint::center(), 0.25), 0.75, 1e-15);
}

TEST(Histogram, DepositConservesMassAndStaysNonnegative) {
  SplitRng rng(103);
  for (int rep = 0; rep < 500; ++rep) {
    const double h = rng.uniform(1e-5, 1e-2);
    TripodHistogram hist(h);
    double want = 0.0;
    for (int k = 0; k < 20; ++k) {
      const int e = static_cast<int>(rng.below(3));
      // endpoints snapped to cell edges half of the time
      double sa = rng.uniform(0.0, 1.0);
      double sb = sa + rng.uniform(0.0, 0.3);
      if (rng.below(2)) {
        sa = std::floor(sa / h) * h;
        sb = std::ceil(sb / h) * h;
      }
      const double m = rng.uniform(0.0, 1.0);
      hist.deposit(e, sa, sb, m);
      want += m;
    }
    EXPECT_NEAR(hist.total(), want, 1e-12 * want);
    for (int e = 0; e < 3; ++e)
      for (const auto& [k, m] : hist.edge_cells(e)) ASSERT_GE(m, 0.0);
  }
}

TEST(Plans, SymmetricConstruction) {
  const Tripod T;
  const auto sc = symmetric(0.05, 1.0);
  const auto pair = build_branching_plans(T, sc);
  const Closed c(sc);
  EXPECT_EQ(pair.source, (TripodPoint{0, 0.5}));
  EXPECT_NEAR(pair.target_lo, c.s_lo, 1e-15);
  EXPECT_NEAR(pair.target_hi, c.s_hi, 1e-15);
  EXPECT_EQ(pair.pi_u.size(), kPlanStrata);
  double mu = 0.0, md = 0.0;
  for (const auto& g : pair.pi_u) {
    mu += g.mass;
    EXPECT_EQ(g.end_edge, 1);
    // every geodesic crosses the center inside [a, a + eps]
    EXPECT_GE(c.D / (c.D + g.s_hi), sc.a - 1e-15);
    EXPECT_LE(c.D / (c.D + g.s_lo), sc.a + sc.eps + 1e-15);
  }
  for (const auto& g : pair.pi_d) {
    md += g.mass;
    EXPECT_EQ(g.end_edge, 2);
  }
  EXPECT_NEAR(mu, 1.0, 1e-12);
  EXPECT_NEAR(md, 1.0, 1e-12);
}

TEST(Plans, PrefixIdentityAndSingularity) {
  const Tripod T;
  SplitRng rng(107);
  for (int rep = 0; rep < 10; ++rep) {
    const auto sc = random_scenario(rng);
    const auto pair = build_branching_plans(T, sc, 512);
    for (int i = 0; i <= 8; ++i) {
      const double t = sc.a * i / 8.0;
      // at t = a a geodesic may sit a roundoff past the center
      EXPECT_LE(pushforward(pair, t, PlanSide::Up).tv_distance(pushforward(pair, t, PlanSide::Down)), 1e-12);
    }
    for (int i = 0; i <= 8; ++i) {
      const double t = sc.a + sc.eps + (1.0 - sc.a - sc.eps) * i / 8.0;
      const auto up = pushforward(pair, t, PlanSide::Up);
      const auto down = pushforward(pair, t, PlanSide::Down);
      EXPECT_EQ(up.overlap_mass(down), 0.0);
      EXPECT_NEAR(up.edge_total(1), sc.beta, 1e-12);
      EXPECT_NEAR(down.edge_total(2), sc.beta, 1e-12);
      EXPECT_NEAR(up.tv_distance(down), 1.0, 1e-12);
    }
  }
}

TEST(Plans, DensityCertificateClosedForm) {
  const Tripod T;
  SplitRng rng(109);
  for (int rep = 0; rep < 10; ++rep) {
    const auto sc = random_scenario(rng);
    const auto pair = build_branching_plans(T, sc);
    const Closed c(sc);
    // (e_b)# is uniform of length b w, the endpoint measures of length w
    EXPECT_NEAR(pair.density_certificate, sc.beta / (sc.b * c.w()), 1e-9 * pair.density_certificate);
  }
}

TEST(Plans, InfeasibleScenarios) {
  const Tripod T;
  auto sc = symmetric(0.5);
  EXPECT_THROW(build_branching_plans(T, sc), InfeasibleScenario);
  sc = symmetric(0.05);
  sc.b = 0.6;
  EXPECT_THROW(build_branching_plans(T, sc), InfeasibleScenario);
  sc = symmetric(0.05);
  sc.beta = 1.5;
  EXPECT_THROW(build_branching_plans(T, sc), InfeasibleScenario);
  EXPECT_THROW(build_branching_plans(Tripod({1.0, 0.3, 1.0}), symmetric(0.05)), InfeasibleScenario);
  EXPECT_THROW(build_branching_plans(Tripod({0.3, 1.0, 1.0}), symmetric(0.05)), InfeasibleScenario);
  EXPECT_THROW(build_branching_plans(T, symmetric(0.05), 0), std::invalid_argument);
  EXPECT_THROW(pushforward(build_branching_plans(T, symmetric(0.05), 16), 1.2, PlanSide::Up), std::domain_error);
}

TEST(Entropy, ExamplesAndClosedForm) {
  const Tripod T;
  const auto sc = symmetric(0.05, 1.0);
  const auto pair = build_branching_plans(T, sc);
  const Closed c(sc);
  // plans coincide at t = a: no log 2 term
  EXPECT_NEAR(entropy_along(pair, T, sc.a, PlanSide::Mixed), entropy_along(pair, T, sc.a, PlanSide::Up), 1e-12);
  // t = 1: uniform arcs of equal length
  const double eu = entropy_along(pair, T, 1.0, PlanSide::Up);
  EXPECT_NEAR(eu, entropy_along(pair, T, 1.0, PlanSide::Down), 1e-12);
  EXPECT_NEAR(eu, std::log(1.0 / c.w()), 1e-9);
  // split identity at the first disjoint time
  const double t = sc.a + sc.eps;
  EXPECT_NEAR(entropy_along(pair, T, t, PlanSide::Mixed),
              0.5 * entropy_along(pair, T, t, PlanSide::Up) + 0.5 * entropy_along(pair, T, t, PlanSide::Down) -
                  std::numbers::ln2,
              1e-6);
  // whole path, including times inside the branch window; partial end cells
  // cost O(h / support length) with h = b w / 1024
  for (int i = 1; i <= 20; ++i) {
    const double s = i / 20.0;
    EXPECT_NEAR(entropy_along(pair, T, s, PlanSide::Mixed), c.mixed_entropy(s), 2.0 / 1024 / s) << s;
  }
}

TEST(Entropy, SplitIdentityAfterBranching) {
  const Tripod T({1.0, 1.5, 2.0});
  SplitRng rng(113);
  for (int rep = 0; rep < 20; ++rep) {
    const auto sc = random_scenario(rng);
    const auto pair = build_branching_plans(T, sc, 1024);
    for (int i = 0; i <= 4; ++i) {
      const double t = sc.a + sc.eps + (1.0 - sc.a - sc.eps) * i / 4.0;
      const double mixed = entropy_along(pair, T, t, PlanSide::Mixed);
      const double split = 0.5 * entropy_along(pair, T, t, PlanSide::Up) +
                           0.5 * entropy_along(pair, T, t, PlanSide::Down) - std::numbers::ln2;
      EXPECT_NEAR(mixed, split, 1e-6);
    }
    const auto lb = lower_entropy_bound(pair, T);
    EXPECT_TRUE(lb.holds) << lb.value << " " << lb.bound;
  }
}

TEST(BranchingInequality, SidesMatchClosedForm) {
  const Tripod T;
  for (double eps : {0.05, 0.01, 0.002}) {
    const auto sc = symmetric(eps);
    const auto pair = build_branching_plans(T, sc);
    const auto q = appendix_inequality(pair, T);
    const Closed c(sc);
    const double C = sc.beta / (sc.b * c.w());
    EXPECT_NEAR(q.ball_mass, 0.75, 1e-15);
    EXPECT_NEAR(q.lhs, eps * (std::log(eps / 7.5) - std::log(C)), 1e-9);
    const double rhs = -(1 - 0.5 - eps) * std::log(2.0) * (0.4 / 0.9 - 0.5 * (0.4 + eps) / 3.0);
    EXPECT_NEAR(q.rhs, rhs, 1e-15);
    EXPECT_TRUE(q.rhs_negative);
  }
  // b -> 0: histogram cells scale with b, so approach the limit instead of
  // evaluating it
  const double limit = -(0.5 - 0.01) * std::log(2.0) * (0.5 - 0.5 * 0.51 / 3.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double b : {0.08, 0.04, 0.02, 0.01}) {
    auto sc = symmetric(0.01);
    sc.b = b;
    const double err = std::abs(appendix_inequality(build_branching_plans(T, sc, 64), T).rhs - limit);
    EXPECT_LE(err, b);
    EXPECT_LT(err, 0.6 * prev);
    prev = err;
  }
}

TEST(BranchingInequality, SweepFailsForSmallEps) {
  const Tripod T;
  const std::vector<double> eps_list{0.05, 0.02, 0.01, 0.005, 0.002};
  const auto rows = branching_sweep(T, symmetric(0.05), eps_list);
  ASSERT_EQ(rows.size(), eps_list.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].rhs, -0.01);
    if (i > 0) {
      EXPECT_GT(rows[i].lhs, rows[i - 1].lhs);
    }
    EXPECT_LT(rows[i].lhs, 0.0);
    EXPECT_EQ(rows[i].lhs > rows[i].rhs, eps_list[i] <= 0.01) << eps_list[i];
  }
  EXPECT_GT(rows.back().lhs, -0.035);
}

TEST(BranchingInequality, FailureSetIsAnInitialSegment) {
  const Tripod T;
  for (double beta : {0.25, 0.5, 1.0}) {
    bool seen_hold = false;
    double prev_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 60; ++i) {
      const double eps = 1e-4 * std::pow(10.0, 3.0 * i / 59.0);
      const auto q = appendix_inequality(build_branching_plans(T, symmetric(eps, beta), 512), T);
      // lhs - rhs is decreasing in eps, so failures never follow a pass
      EXPECT_LT(q.lhs - q.rhs, prev_gap);
      prev_gap = q.lhs - q.rhs;
      if (!q.contradiction) seen_hold = true;
      EXPECT_FALSE(seen_hold && q.contradiction) << beta << " " << eps;
    }
  }
}

namespace {

double failure_threshold(const Tripod& T, BranchingScenario sc) {
  double lo = 1e-6, hi = 0.2;
  auto fails = [&](double e) {
    sc.eps = e;
    return appendix_inequality(build_branching_plans(T, sc, 512), T).contradiction;
  };
  for (int i = 0; i < 40; ++i) {
    const double mid = std::sqrt(lo * hi);
    (fails(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST(BranchingInequality, ThresholdGrowsWithDepthOfRightHandSide) {
  // rhs depends on (a, b, eps) only. Lowering b at a = 0.3 makes rhs more
  // negative and the failure window wider.
  const Tripod T;
  double prev_rhs = 0.0, prev_eps = 0.0;
  for (double b : {0.2, 0.1, 0.05, 0.02}) {
    BranchingScenario sc = symmetric(1e-3);
    sc.a = 0.3;
    sc.b = b;
    const double rhs = appendix_inequality(build_branching_plans(T, sc, 64), T).rhs;
    const double eps_star = failure_threshold(T, sc);
    EXPECT_LT(rhs, prev_rhs);
    EXPECT_GT(eps_star, prev_eps);
    prev_rhs = rhs;
    prev_eps = eps_star;
  }
}

TEST(Renyi, RatioApproachesThreshold) {
  const Tripod T;
  for (double N : {2.0, 8.0, 64.0, 1024.0}) {
    auto sc = symmetric(1e-3, 1.0);
    sc.N = N;
    const auto pair = build_branching_plans(T, sc);
    const auto r = renyi_contradiction(pair, T, N);
    EXPECT_DOUBLE_EQ(r.threshold, std::pow(2.0, 1.0 / N));
    EXPECT_TRUE(r.passed) << N << " " << r.ratio;
    EXPECT_GT(r.ratio, 1.0);
    // closed-form chain on uniform pieces
    const Closed c(sc);
    const double span = sc.a + sc.eps - sc.b;
    const double want = (sc.eps / span * c.renyi(sc.b, N) + (sc.a - sc.b) / span * c.renyi(sc.a + sc.eps, N)) /
                        c.renyi(sc.a, N);
    // cells are b w / 1024 wide, so partially filled end cells cost O(1/1024)
    EXPECT_NEAR(r.ratio, want, 1.0 / 1024);
  }
  EXPECT_THROW(renyi_contradiction(build_branching_plans(T, symmetric(0.01), 16), T, 1.0), std::domain_error);
}

TEST(Renyi, RatioIncreasesAsEpsShrinks) {
  const Tripod T;
  double prev = 0.0;
  for (double eps : {0.05, 0.02, 0.01, 0.005, 0.002, 0.001}) {
    const auto r = renyi_contradiction(build_branching_plans(T, symmetric(eps, 1.0)), T, 2.0);
    EXPECT_GT(r.ratio, prev);
    EXPECT_LT(r.ratio, std::sqrt(2.0));
    prev = r.ratio;
  }
}

TEST(Shannon, GapClosedForm) {
  const Tripod T;
  for (double K : {0.0, 1.0, -2.0}) {
    const auto sc = symmetric(0.05, 1.0);
    const auto pair = build_branching_plans(T, sc);
    const auto g = shannon_k_gap(pair, T, K);
    const Closed c(sc);
    // both endpoint measures are uniform on the unrolled line
    const double la = c.lo(sc.b), lb = c.hi(sc.b), ra = c.lo(sc.a + sc.eps), rb = c.hi(sc.a + sc.eps);
    const double mean = 0.5 * (ra + rb) - 0.5 * (la + lb);
    const double dlen = (rb - ra) - (lb - la);
    const double w2 = std::sqrt(mean * mean + dlen * dlen / 12.0);
    EXPECT_NEAR(g.w2, w2, 1e-6);
    const double span = sc.a + sc.eps - sc.b;
    const double gap = c.mixed_entropy(sc.a) - (sc.eps / span * c.mixed_entropy(sc.b) +
                                                (sc.a - sc.b) / span * c.mixed_entropy(sc.a + sc.eps) +
                                                0.5 * std::abs(K) * sc.eps * (sc.a - sc.b) / (span * span) * w2 * w2);
    EXPECT_NEAR(g.gap, gap, 1e-3);
    EXPECT_GT(g.gap, 0.0);
  }
}
