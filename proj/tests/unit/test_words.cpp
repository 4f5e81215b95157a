#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include <dlab/words.hpp>

using namespace dlab;

namespace {

const GeneratorSet& gens() {
  static const GeneratorSet G = make_generators(ChartConfig{}, Variant::sec2);
  return G;
}

double level_of(const Point& p) { return gens().chart->canonical(p).u(); }

// Independent count: 1 + 2 (bits - 1) + (popcount - 1).
std::uint64_t length_oracle(std::uint64_t n) {
  if (n == 0) return 0;
  int bits = 64 - std::countl_zero(n);
  return 1 + 2 * static_cast<std::uint64_t>(bits - 1) + static_cast<std::uint64_t>(std::popcount(n) - 1);
}

}  // namespace

TEST(Words, FPowFour) {
  GroupWord w = word_f_pow(4);
  EXPECT_EQ(w.serialize(), "fhat^2 f^1 fhat^-2");
  EXPECT_EQ(w.length(), 5u);
}

TEST(Words, FPowThousandLengthAndValue) {
  GroupWord w = word_f_pow(1000);
  EXPECT_LE(w.length(), 41u);
  EXPECT_EQ(w.length(), length_oracle(1000));
  EXPECT_NEAR(level_of(evaluate_word(gens(), w, Point::level(0.0))), 1000.0, 1e-9);
}

TEST(Words, FPowLengthFormulaMatchesBuiltWords) {
  for (std::uint64_t n = 0; n < 3000; ++n) {
    ASSERT_EQ(f_pow_length(n), word_f_pow(n).length()) << n;
    ASSERT_EQ(f_pow_length(n), length_oracle(n)) << n;
    if (n >= 2) {
      ASSERT_LE(static_cast<double>(f_pow_length(n)), 3.0 * std::log2(static_cast<double>(n)) + 1.0) << n;
    }
  }
}

TEST(Words, FPowSevenTranslates) {
  EXPECT_NEAR(level_of(evaluate_word(gens(), word_f_pow(7), Point::level(0.3))), 7.3, 1e-12);
}

TEST(Words, CommutatorOfFWithInverseIsEmpty) {
  GroupWord f = GroupWord::letter(Sym::f);
  EXPECT_TRUE((f * f.inverse() * f.inverse() * f).empty());
}

TEST(Words, PsiThenInverse) {
  GroupWord w{{Sym::psi, 1}};
  WordEvaluator ev(gens(), std::vector<Letter>{{Sym::psi, -1}, {Sym::psi, 1}});
  const Chart& c = *gens().chart;
  for (double u : {-0.9, -0.6, 0.2, 0.8, 3.0}) {
    Point p = Point::level(u);
    EXPECT_LT(c.ambient_distance(ev.apply(p), p), 1e-9) << u;
  }
  EXPECT_EQ(w.length(), 1u);
}

TEST(Words, EmptyWord) {
  GroupWord w;
  EXPECT_EQ(w.length(), 0u);
  EXPECT_EQ(w.serialize(), "");
  EXPECT_TRUE(GroupWord::parse("   ").empty());
  EXPECT_EQ(level_of(evaluate_word(gens(), w, Point::level(2.5))), 2.5);
}

TEST(Words, SerializeRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> sym(0, 6), ex(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    GroupWord w;
    for (int k = 0; k < 12; ++k) w.push({all_syms[sym(rng)], ex(rng)});
    GroupWord back = GroupWord::parse(w.serialize());
    ASSERT_EQ(back, w);
    ASSERT_EQ(back.length(), w.length());
  }
  EXPECT_EQ(GroupWord::parse("f g^-2 g^2 psi").serialize(), "f^1 psi^1");
}

TEST(Words, ParseRejectsBadInput) {
  EXPECT_THROW(GroupWord::parse("q^2"), std::invalid_argument);
  EXPECT_THROW(GroupWord::parse("f^x"), std::invalid_argument);
  EXPECT_THROW(GroupWord::parse("f^2a"), std::invalid_argument);
  EXPECT_THROW(GroupWord::parse("f^"), std::invalid_argument);
}

TEST(Words, InverseAndLength) {
  GroupWord w = GroupWord::parse("fhat^3 h^-2 psi^1 g^4");
  EXPECT_EQ(w.length(), 10u);
  EXPECT_TRUE((w * w.inverse()).empty());
  EXPECT_EQ(w.inverse().serialize(), "g^-4 psi^-1 h^2 fhat^-3");
  EXPECT_EQ(w.pow(3).length(), 30u);
  EXPECT_EQ(w.pow(-2), w.inverse().pow(2));
}

TEST(Words, ReductionPreservesEvaluation) {
  // raw concatenation with cancelling pairs against its freely reduced form
  std::vector<Letter> x{{Sym::fhat, 1}, {Sym::f, 2}, {Sym::psi, 1}};
  std::vector<Letter> xinv{{Sym::psi, -1}, {Sym::f, -2}, {Sym::fhat, -1}};
  std::vector<Letter> y{{Sym::g, 1}, {Sym::f, -1}};
  auto raw = concat_raw({y, x, xinv, y});
  GroupWord reduced;
  for (const auto& l : raw) reduced.push(l);
  EXPECT_LT(reduced.letters().size(), raw.size());
  WordEvaluator er(gens(), raw), ew(gens(), reduced);
  const Chart& c = *gens().chart;
  for (double u : {-0.7, 0.1, 0.4, 0.9, 1.6}) {
    Point p = Point::level(u);
    EXPECT_LT(c.distance(er.apply(p), ew.apply(p)), 1e-10) << u;
  }
}

TEST(Words, IdentityWordShapes) {
  EllSequence e2(Variant::sec2), e3(Variant::sec3);
  auto W = identity_words(2, Variant::sec2, e2);
  EXPECT_EQ(W.n, 4u);
  EXPECT_EQ(W.power, 4u);
  EXPECT_EQ(W.c, W.a * W.b * W.a.inverse() * W.b.inverse());
  auto W3 = identity_words(4, Variant::sec3, e3);
  EXPECT_EQ(W3.power, e3.L(4));
  EXPECT_FALSE(W3.d.empty());
  EXPECT_THROW(check_even(3), std::domain_error);
  EXPECT_THROW(check_even(0), std::domain_error);
  EXPECT_THROW(check_even(42), std::overflow_error);
}

TEST(Words, DistortionRatioDecreasesForSec2) {
  auto rows = distortion_table(20, Variant::sec2);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k - 1].i >= 6) {
      EXPECT_LT(rows[k].ratio, rows[k - 1].ratio) << rows[k].i;
    }
    EXPECT_NEAR(rows[k].form, rows[k].i * static_cast<double>(EllSequence(Variant::sec2).ell(rows[k].i / 2)), 0.0);
  }
}

TEST(Words, LogDerivativeAlongWordMatchesFPow) {
  // f is a level translation; the word f^7 has zero level log-derivative but the ambient one
  // is log Dphi^-1 at the end minus at the start.
  const Chart& c = *gens().chart;
  WordEvaluator ev(gens(), word_f_pow(7));
  auto v = ev.apply_with_log_deriv(Point::level(0.3));
  double expected = c.jet_level(0.3).L - c.jet_level(7.3).L;
  EXPECT_NEAR(v.log_deriv, expected, 1e-9);
}
