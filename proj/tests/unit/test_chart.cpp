#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <dlab/chart.hpp>
#include <dlab/smoothstep.hpp>

using namespace dlab;

namespace {

const Chart& chart() {
  static const Chart c;
  return c;
}

// Literal tail formulas.
double right_tail(double x) { return std::exp(std::exp(1.0 / (1.0 - x))); }
double left_tail(double x) { return -std::exp(std::exp(1.0 / x)); }

}  // namespace

TEST(Chart, RightTailAtThreeQuarters) {
  double u = chart().phi(0.75);
  EXPECT_NEAR(u / std::exp(std::exp(4.0)), 1.0, 1e-14);
  EXPECT_NEAR(u, 5.148e23, 0.001e23);
}

TEST(Chart, LeftTailAtOneQuarter) {
  double u = chart().phi(0.25);
  EXPECT_NEAR(u / -std::exp(std::exp(4.0)), 1.0, 1e-14);
}

TEST(Chart, RoundTripInBlend) {
  const Chart& c = chart();
  Point p = c.phi_inv(0.37);
  // one ulp of x near 1/2 is worth about 1e-11 in level here
  EXPECT_NEAR(c.phi(p), 0.37, 1e-10);
  for (double x : {0.491, 0.4999, 0.5, 0.5001, 0.505, 0.509}) {
    double u = c.phi(x);
    EXPECT_NEAR(c.ambient(c.phi_inv(u)), x, 1e-10) << x;
  }
}

TEST(Chart, InverseOfTailValueIsExact) {
  Point p = chart().phi_inv(std::exp(std::exp(4.0)));
  ASSERT_TRUE(p.has_complement());
  EXPECT_NEAR(p.w(), 0.25, 1e-15);
}

TEST(Chart, ComplementAtMillion) {
  // Oracle in extended precision.
  long double w = 1.0L / std::log(std::log(1e6L));
  Point p = chart().phi_inv(1e6);
  EXPECT_NEAR(p.w(), static_cast<double>(w), 1e-15);
  EXPECT_NEAR(p.w(), 0.3808, 1e-4);
}

TEST(Chart, MiddleIsZeroLevel) {
  EXPECT_EQ(chart().phi(0.5), 0.0);
  EXPECT_EQ(chart().phi_inv_centered(0.0), 0.0);
}

TEST(Chart, LogDerivativeRightTailClosedForm) {
  double expected = std::exp(4.0) + 4.0 + 2.0 * std::log(4.0);
  EXPECT_NEAR(chart().log_dphi(0.75), expected, 1e-12 * expected);
  EXPECT_NEAR(expected, 61.37, 0.01);
  // relaxed finite-difference cross-check of the tail formula
  double h = 1e-7;
  double fd = (std::log(right_tail(0.75 + h)) - std::log(right_tail(0.75 - h))) / (2 * h);
  EXPECT_NEAR(std::log(fd * right_tail(0.75)), expected, 1e-4);
}

TEST(Chart, LogDerivativeMatchesDifferencesInBlend) {
  const Chart& c = chart();
  for (double x : {0.4905, 0.495, 0.4999, 0.5, 0.503, 0.5094}) {
    double h = 1e-9;
    double fd = (c.phi(x + h) - c.phi(x - h)) / (2 * h);
    EXPECT_NEAR(std::log(fd), c.log_dphi(x), 1e-6 * std::max(1.0, std::fabs(c.log_dphi(x)))) << x;
  }
}

TEST(Chart, LogDerivativeIncreasingOnRightTail) { EXPECT_GT(chart().log_dphi(0.8), chart().log_dphi(0.75)); }

TEST(Chart, StrictlyIncreasingOnGrid) {
  const Chart& c = chart();
  double prev = -std::numeric_limits<double>::infinity();
  // levels overflow M below x = 0.153 and above 0.847
  for (int k = 1600; k <= 8400; ++k) {
    double x = k / 10000.0;
    double u = c.phi(x);
    ASSERT_GT(u, prev) << x;
    prev = u;
  }
  // finer across the blend, where the grid above has two nodes
  prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10000; ++k) {
    double xi = -0.012 + 0.024 * k / 10000.0;
    double u = c.phi_centered(xi);
    ASSERT_GT(u, prev) << xi;
    prev = u;
  }
}

TEST(Chart, TailExactness) {
  const Chart& c = chart();
  for (double x : {0.16, 0.2, 0.3, 0.45, 0.49}) EXPECT_NEAR(c.phi(x) / left_tail(x), 1.0, 4e-15) << x;
  for (double x : {0.51, 0.6, 0.75, 0.84}) EXPECT_NEAR(c.phi(x) / right_tail(x), 1.0, 4e-15) << x;
}

TEST(Chart, RoundTripLevelsUpToOverflow) {
  const Chart& c = chart();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    double u = std::sinh(U(rng) * std::asinh(c.overflow_level()));
    double back = c.phi(c.phi_inv(u));
    ASSERT_LT(std::fabs(back - u) / std::max(1.0, std::fabs(u)), 1e-10) << u;
  }
}

TEST(Chart, GapLengthAtTenThousand) {
  double n = 1e4;
  double scaled = static_cast<double>(chart().gap_length(n)) * n * std::log(n) * std::pow(std::log(std::log(n)), 2);
  EXPECT_NEAR(scaled, 1.0, 0.2);
}

TEST(Chart, GapLengthMatchesExtendedDifference) {
  for (double n : {3000.0, 1e4, 123456.0, 1e6}) {
    long double N = n;
    long double d = 1.0L / std::log(std::log(N)) - 1.0L / std::log(std::log(N + 1.0L));
    EXPECT_NEAR(static_cast<double>(chart().gap_length(n) / d), 1.0, 1e-9) << n;
  }
}

TEST(Chart, GapRatioMillionToTenThousand) {
  EXPECT_LT(static_cast<double>(chart().gap_length(1e6) / chart().gap_length(1e4)), 1e-2);
}

TEST(Chart, GapsSumBelowOne) {
  long double s = 0;
  for (int n = 5000; n <= 10000; ++n) s += chart().gap_length(n);
  EXPECT_LT(static_cast<double>(s), 1.0);
}

TEST(Chart, GapScaledTendsToOneMonotonically) {
  double prev = 10.0;
  for (double n = 1e4; n <= 1e8; n *= 3) {
    double v = static_cast<double>(chart().gap_length(n)) * n * std::log(n) * std::pow(std::log(std::log(n)), 2);
    EXPECT_LT(std::fabs(v - 1.0), std::fabs(prev - 1.0)) << n;
    prev = v;
  }
}

TEST(Chart, GapLengthDomainError) { EXPECT_THROW(chart().gap_length(2.0), std::domain_error); }

TEST(Chart, PhiDomainError) {
  EXPECT_THROW(chart().phi(0.05), std::overflow_error);
  EXPECT_THROW(chart().phi(0.0), std::domain_error);
  EXPECT_THROW(chart().phi(1.0), std::domain_error);
}

TEST(Chart, ConfigValidation) {
  EXPECT_THROW(Chart(ChartConfig{0.6, 1e300, 4096}), std::invalid_argument);
  EXPECT_THROW(Chart(ChartConfig{0.49, 10.0, 4096}), std::invalid_argument);
  EXPECT_THROW(Chart(ChartConfig{0.49, 1e300, 1}), std::invalid_argument);
}

TEST(Chart, TailLevel) { EXPECT_NEAR(chart().tail_level(), std::exp(std::exp(1.0 / 0.49)), 1e-9); }

TEST(Chart, OrderKeyIsMonotoneAcrossRepresentations) {
  const Chart& c = chart();
  std::vector<Point> pts{Point::ambient(-1.0),         Point::ambient(-0.2),      Point::ambient(0.0),
                         Point::ambient(1e-3),          Point::level(-1e200),      Point::level(-3.0),
                         Point::level(0.0),             Point::level(5.0),         Point::level(1e250),
                         Point::near_one(1e-3),         Point::near_one(0.0),      Point::ambient(1.5)};
  for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_LT(c.compare(pts[k - 1], pts[k]), 0) << k;
  EXPECT_EQ(c.compare(Point::near_one(-0.5), Point::ambient(1.5)), 0);
}

TEST(SmoothStep, FlatEndsAndSymmetry) {
  EXPECT_EQ(step(0.0), 0.0);
  EXPECT_EQ(step(1.0), 1.0);
  for (double s : {0.1, 0.3, 0.5, 0.77}) EXPECT_NEAR(step(s) + step(1.0 - s), 1.0, 1e-15) << s;
  EXPECT_NEAR(step(0.5), 0.5, 1e-15);
}
