#include <gtest/gtest.h>

#include <cmath>

#include <dlab/kopell.hpp>

using namespace dlab::kopell;

TEST(Kopell, MobiusValues) {
  EXPECT_DOUBLE_EQ(mobius_pow(1, 0.5), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(mobius_pow(2, 0.5), 0.8);
  EXPECT_EQ(mobius_pow(0, 0.37), 0.37);
  EXPECT_DOUBLE_EQ(mobius_pow(-1, 2.0 / 3.0), 0.5);
}

TEST(Kopell, MobiusGroupLaw) {
  for (long long m : {-7LL, -1LL, 2LL, 9LL})
    for (long long n : {-3LL, 1LL, 5LL})
      for (double x : {0.01, 0.3, 0.5, 0.93}) EXPECT_NEAR(mobius_pow(m, mobius_pow(n, x)), mobius_pow(m + n, x), 1e-14);
}

TEST(Kopell, GapFactoredMatchesSubtraction) {
  for (long long n : {1LL, 5LL, 20LL})
    EXPECT_NEAR(mobius_gap(n, b, a) / std::fabs(mobius_pow(n, b) - mobius_pow(n, a)), 1.0, 1e-9);
}

TEST(Kopell, OverflowGuard) {
  EXPECT_THROW(mobius_pow(1021, 0.5), std::overflow_error);
  EXPECT_THROW(d_mobius_pow(-1021, 0.5), std::overflow_error);
  EXPECT_NO_THROW(mobius_pow(1020, 0.5));
}

TEST(Kopell, BumpIntegralIsOneOneHundredTwentieth) {
  // B(u) + B(1-u) = 1 makes int_0^1 B = 1/2, so I = (h/2)(1/2).
  EXPECT_NEAR(bump().I(), h / 4.0, 1e-15);
  EXPECT_NEAR(bump().I(), 1.0 / 120.0, 1e-15);
  EXPECT_NEAR(bump().primitive(b), 1.0 / 120.0, 1e-14);
}

TEST(Kopell, BumpNodeValues) {
  const auto& B = bump();
  EXPECT_EQ(B(a), 0.0);
  EXPECT_NEAR(B(b), 0.5, 1e-15);
  EXPECT_NEAR(B(bp), 0.0, 1e-15);
  EXPECT_NEAR(B(bpp), -0.5, 1e-15);
  EXPECT_NEAR(B(x1), 0.0, 1e-15);
  EXPECT_EQ(B(0.52), 0.0);
}

TEST(Kopell, BumpOddAboutBPrime) {
  const auto& B = bump();
  for (double d : {0.001, 0.01, 0.02, 0.03, 0.05}) {
    EXPECT_NEAR(B(bp + d), -B(bp - d), 1e-15) << d;
    EXPECT_NEAR(B.primitive(bp + d), B.primitive(bp - d), 1e-15) << d;
  }
  EXPECT_NEAR(B.primitive(x1), 0.0, 1e-15);
}

TEST(Kopell, BumpDerivativesAgainstDifferences) {
  const auto& B = bump();
  for (double s : {0.54, 0.555, 0.58, 0.61, 0.64}) {
    double e = 1e-6;
    EXPECT_NEAR((B(s + e) - B(s - e)) / (2 * e), B.at(s).d1, 1e-5) << s;
    EXPECT_NEAR((B.at(s + e).d1 - B.at(s - e).d1) / (2 * e), B.at(s).d2, 1e-3 * std::max(1.0, std::fabs(B.at(s).d2))) << s;
    EXPECT_NEAR((B.primitive(s + e) - B.primitive(s - e)) / (2 * e), B(s), 1e-8) << s;
  }
}

TEST(Kopell, GnFixesEndsAndShiftsB) {
  for (long long n : {1LL, 7LL, 100LL}) {
    Gn g{n};
    auto nn = static_cast<double>(n);
    EXPECT_EQ(g(2.0 / 3.0), 2.0 / 3.0);
    EXPECT_EQ(g(0.5), 0.5);
    EXPECT_NEAR(g(x1 - 1e-9), x1 - 1e-9, 1e-15);
    EXPECT_NEAR(g(b), b + (1.0 / 120.0) / nn, 1e-15);
    EXPECT_NEAR(g.derivative(1, b), 1.0 + 1.0 / (2.0 * nn), 1e-15);
    EXPECT_NEAR(g.derivative(1, a), 1.0, 1e-15);
  }
}

TEST(Kopell, GnNonPositiveIsIdentity) {
  for (long long n : {0LL, -3LL}) {
    Gn g{n};
    EXPECT_EQ(g(b), b);
    EXPECT_EQ(g.derivative(1, b), 1.0);
  }
}

TEST(Kopell, GnIsIncreasing) {
  Gn g{1};
  double prev = 0.5;
  for (int k = 1; k <= 4000; ++k) {
    double y = 0.5 + (1.0 / 6.0) * k / 4000.0;
    ASSERT_GT(g(y), prev) << y;
    prev = g(y);
  }
}

TEST(Kopell, PastedGMonotoneAndContinuous) {
  PastedG G;
  double prev = 0.0;
  double worst_jump = 0.0;
  for (int k = 1; k < 200000; ++k) {
    double x = k / 200000.0;
    double y = G.apply(x);
    ASSERT_GT(y, prev) << x;
    worst_jump = std::max(worst_jump, y - prev);
    prev = y;
  }
  EXPECT_LT(worst_jump, 1e-4);
}

TEST(Kopell, PastedGIsConjugateOfGnOnEachCell) {
  PastedG G;
  for (long long n : {-4LL, 0LL, 1LL, 6LL})
    for (double y : {0.51, a + 0.01, b, 0.6, 0.65}) {
      double lhs = G.apply(mobius_pow(n, y));
      double rhs = mobius_pow(n, Gn{n}(y));
      EXPECT_NEAR(lhs, rhs, 1e-14) << n << " " << y;
    }
}

TEST(Kopell, PastedDerivativeAgainstDifferences) {
  PastedG G;
  for (double x : {0.05, 0.3, 0.57, 0.6, 0.85, 0.99}) {
    double e = 1e-7 * std::min(x, 1.0 - x);
    double fd = (G.apply(x + e) - G.apply(x - e)) / (2 * e);
    EXPECT_NEAR(fd / G.derivative(x), 1.0, 1e-6) << x;
  }
}

TEST(Kopell, PastedDerivativeFormulaHasSquare) {
  // at y = b the ratio squared times Dg_n(b)
  for (long long n : {1LL, 4LL, -2LL}) {
    double p = std::ldexp(1.0, static_cast<int>(n));
    double gb = Gn{n}(b);
    double ratio = ((p - 1.0) * b + 1.0) / ((p - 1.0) * gb + 1.0);
    double oracle = ratio * ratio * Gn{n}.derivative(1, b);
    EXPECT_NEAR(PastedG::derivative_cell(n, b), oracle, 1e-14);
  }
}

TEST(Kopell, GapBoundBand) {
  auto r = gap_bound_check(5, 40);
  EXPECT_LT(r.band, 2.0);
  for (const auto& row : r.rows) EXPECT_LT(row.identity_error, 1e-12);
}

TEST(Kopell, ConvergenceScalesAsOneOverN) {
  auto rows = gn_convergence({10, 100, 1000}, 4000);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(rows[0].scaled[k], rows[2].scaled[k], 1e-9 * rows[0].scaled[k]);
    EXPECT_LT(rows[2].sup[k], rows[0].sup[k]);
  }
  EXPECT_NEAR(rows[0].scaled[0], 0.5, 1e-12);
}
