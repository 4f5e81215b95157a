#include <gtest/gtest.h>

#include <cmath>

#include <dlab/verify.hpp>

using namespace dlab;

namespace {

const GeneratorSet& sec2() {
  static const GeneratorSet G = make_generators(ChartConfig{}, Variant::sec2);
  return G;
}
const GeneratorSet& sec3() {
  static const GeneratorSet G = make_generators(ChartConfig{}, Variant::sec3);
  return G;
}

}  // namespace

TEST(Verify, IdentitySmallBlock) {
  auto r = verify_identity(sec2(), 2, 200);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.discrepancy, 1e-6);
  EXPECT_LT(r.h_half_discrepancy, 1e-8);
  EXPECT_GT(r.signal, 1e-6);  // fbar^{n/2} really differs from f^{n/2}
  EXPECT_EQ(r.samples, 200u);
  EXPECT_EQ(r.word_length, identity_words(2, Variant::sec2, sec2().ell).rhs.length());
}

TEST(Verify, SupportsSmallBlock) {
  auto claims = verify_supports(sec2(), 2, 900);
  ASSERT_EQ(claims.size(), 4u);
  for (const auto& c : claims) {
    EXPECT_TRUE(c.pass) << c.name << " worst " << c.worst;
    EXPECT_EQ(c.on_support + c.off_support, 900u);
    EXPECT_GT(c.signal, 0.0) << c.name;
  }
}

TEST(Verify, Sec3SupportsIncludeConjugatedCore) {
  auto claims = verify_supports(sec3(), 2, 600);
  ASSERT_EQ(claims.size(), 6u);
  EXPECT_EQ(claims[3].name, "d");
  for (const auto& c : claims) EXPECT_TRUE(c.pass) << c.name << " worst " << c.worst;
}

TEST(Verify, OrientationMatchesDirectSupport) {
  auto r = orientation_by_support(sec3(), 4, 1000);
  EXPECT_EQ(r.chosen, Orientation::fhat_i_first);
  EXPECT_NEAR(r.fhat_i_first_left, r.direct_left, 0.1);
  EXPECT_GT(std::fabs(r.fhat_minus_i_first_left - r.direct_left), 0.5);
}

TEST(Verify, TimeLawFewPairs) {
  auto r = time_law_check(sec2().cells, 5);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.pairs, 5u);
  EXPECT_EQ(r.ell_rows.size(), 3u);
  EXPECT_GT(r.min_signal, 0.0);
}

TEST(Verify, DisplacementIsRelativeInLevels) {
  const Chart& c = *sec2().chart;
  EXPECT_DOUBLE_EQ(displacement(c, Point::level(1000.0), Point::level(1001.0)), 1.0 / 1001.0);
  EXPECT_DOUBLE_EQ(displacement(c, Point::level(0.2), Point::level(0.7)), 0.5);
  EXPECT_EQ(displacement(c, Point::ambient(-0.5), Point::ambient(-0.5)), 0.0);
}

TEST(Verify, LogSpacedAndHolderCells) {
  auto v = log_spaced(256, 65536, 17);
  ASSERT_EQ(v.size(), 17u);
  EXPECT_EQ(v.front(), 256.0);
  EXPECT_EQ(v.back(), 65536.0);
  EXPECT_EQ(v[8], 4096.0);
  auto ns = holder_cells(2, 8, 2, 2);
  std::vector<double> expect{2, 3, 8, 12, 32, 48, 128, 192};
  EXPECT_EQ(ns, expect);
  for (double n : ns) EXPECT_TRUE(TimeSequences::active(n)) << n;
}

TEST(Verify, FitSlopeOfLine) {
  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  EXPECT_NEAR(fit_slope(x, y), 2.0, 1e-14);
}

TEST(Verify, TsuboiRowsOnFundamentalDomain) {
  auto r = pixton_tsuboi_check(sec2().cells, FlowField{FieldKind::translation, Conjugation::fundamental, 0}, {0.1, 0.5},
                               256);
  EXPECT_GT(r.C1, 0.0);
  EXPECT_GT(r.C2, 0.0);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_LT(r.rows[0].lhs, r.rows[1].lhs);
  EXPECT_LT(r.quadrature_error, 1e-8);
  EXPECT_THROW(pixton_tsuboi_check(sec2().cells, FlowField{FieldKind::translation, Conjugation::chart, 0}, {0.1}),
               std::invalid_argument);
}

TEST(Verify, GapAsymptoticsRows) {
  auto rows = gap_asymptotics(*sec2().chart, 1e4, 1e6, 5);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LT(rows[k].gap, rows[k - 1].gap);
    EXPECT_LT(std::fabs(rows[k].ratio - 1.0), std::fabs(rows[k - 1].ratio - 1.0));
  }
}

TEST(Verify, C1EchoSkipsIdleCells) {
  auto rows = c1_pasting_echo(sec2(), {2.0, 5.0, 8.0, 130.0}, 64);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(rows[0].sup_log_deriv, rows[2].sup_log_deriv);
}
