#include <gtest/gtest.h>

#include <cmath>

#include <dlab/construction.hpp>

using namespace dlab;

namespace {

const GeneratorSet& gens() {
  static const GeneratorSet G = make_generators(ChartConfig{}, Variant::sec2);
  return G;
}

double level_of(const Point& p) { return gens().chart->canonical(p).u(); }

}  // namespace

TEST(Flow, TimeZeroIsIdentity) {
  auto cc = gens().cells;
  for (auto conj : {Conjugation::chart, Conjugation::fundamental, Conjugation::cell})
    for (auto kind : {FieldKind::translation, FieldKind::dilation}) {
      auto m = flow(cc, FlowField{kind, conj, 2}, 0.0);
      for (double u : {-3.0, 0.25, 2.5, 40.0}) EXPECT_EQ(level_of(m->apply(Point::level(u))), u);
    }
}

TEST(Flow, GroupLawOnCell) {
  auto cc = gens().cells;
  for (auto kind : {FieldKind::translation, FieldKind::dilation}) {
    CellMap a(cc, kind, 0.3), b(cc, kind, 0.45), ab(cc, kind, 0.75);
    for (int k = 1; k < 50; ++k) {
      double v = k / 50.0;
      EXPECT_NEAR(a.apply(b.apply(v)), ab.apply(v), 1e-12) << v;
    }
  }
}

TEST(Flow, GroupLawOnChart) {
  auto c = gens().chart;
  ChartFlowMap a(c, FieldKind::dilation, 0.5), b(c, FieldKind::dilation, 1.25), ab(c, FieldKind::dilation, 1.75);
  for (double u : {-50.0, -1.0, 0.3, 7.0, 1e5}) {
    double x = level_of(a.apply(b.apply(Point::level(u)))), y = level_of(ab.apply(Point::level(u)));
    EXPECT_NEAR(x / y, 1.0, 1e-12) << u;
  }
}

TEST(Generators, FhatDoublesLevels) { EXPECT_NEAR(level_of(gens().get("fhat", 1)->apply(Point::level(3.0))), 6.0, 1e-12); }

TEST(Generators, FSendsX0ToX1) {
  const auto& G = gens();
  EXPECT_NEAR(level_of(G.get("f", 1)->apply(Point::level(0.0))), 1.0, 1e-12);
  EXPECT_NEAR(level_of(G.get("f", 1)->apply(Point::level(-7.5))), -6.5, 1e-12);
}

TEST(Generators, GFixesEndsOfFundamentalDomain) {
  const auto& G = gens();
  auto g = G.get("g", 1);
  EXPECT_EQ(level_of(g->apply(Point::level(0.0))), 0.0);
  EXPECT_NEAR(level_of(g->apply(Point::level(1.0))), 1.0, 1e-15);
  EXPECT_NEAR(g->jet(Point::level(0.0)).L, 0.0, 1e-12);
  EXPECT_NEAR(g->jet(Point::level(1.0 - 1e-12)).L, 0.0, 1e-9);
  // outside I it is the identity
  for (double u : {-0.5, 1.5, 9.0}) EXPECT_EQ(level_of(g->apply(Point::level(u))), u);
}

TEST(Generators, GMovesMidpointRight) {
  const auto& G = gens();
  const CellChart& cc = *G.cells;
  double vmid = cc.kappa_inv(Point::ambient(0.5));
  Point img = G.get("g", 1)->apply(Point::level(vmid));
  EXPECT_GT(level_of(img), vmid);
  EXPECT_LT(level_of(img), 1.0);
}

TEST(Generators, PsiAnchors) {
  const auto& G = gens();
  const Chart& c = *G.chart;
  auto psi = G.get("psi", 1);
  EXPECT_LT(c.ambient_distance(psi->apply(Point::level(-0.75)), Point::ambient(0.0)), 1e-14);
  EXPECT_LT(c.ambient_distance(psi->apply(Point::level(1.0)), Point::ambient(1.0)), 1e-14);
  EXPECT_EQ(c.compare(psi->apply(Point::ambient(-1.0)), Point::ambient(-1.0)), 0);
  EXPECT_EQ(c.compare(psi->apply(Point::ambient(2.0)), Point::ambient(2.0)), 0);
}

TEST(Generators, PsiIsIdentityBetweenMinusHalfAndZero) {
  const auto& G = gens();
  auto psi = G.get("psi", 1);
  for (int k = 0; k <= 20; ++k) {
    double u = -0.5 + 0.5 * k / 20.0;
    EXPECT_NEAR(level_of(psi->apply(Point::level(u))), u, 1e-12) << u;
    EXPECT_NEAR(psi->jet(Point::level(u)).L, 0.0, 1e-9) << u;
  }
}

TEST(Generators, PsiBridgesAreMonotone) {
  const auto* psi = dynamic_cast<const Psi*>(gens().get("psi", 1).get());
  ASSERT_NE(psi, nullptr);
  for (int k : {0, 1, 3, 4}) {
    const auto& b = psi->bridge(k);
    EXPECT_GT(b.W, 0.0);
    EXPECT_GT(b.R, std::max(b.ma, b.mb)) << k;
  }
  EXPECT_LT(psi->xi_m34(), psi->xi_m12());
  EXPECT_LT(psi->xi_m12(), 0.0);
  EXPECT_GT(psi->xi_1(), 0.0);
}

TEST(Generators, PastedMapsIdleOnOddBlocks) {
  const auto& G = gens();
  for (const char* s : {"h", "hhat", "htilde"}) {
    auto m = G.get(s, 1);
    for (double u : {0.5, 4.3, 7.9, 16.5, 31.2, 64.5}) EXPECT_EQ(level_of(m->apply(Point::level(u))), u) << s << " " << u;
    // cell maps only move the middle of a cell visibly; the tails sit at astronomically large levels
    for (double u : {2.5, 3.5, 8.5, 12.5}) EXPECT_NE(level_of(m->apply(Point::level(u))), u) << s << " " << u;
  }
}

TEST(Generators, PastedMapsFlatAtCellEnds) {
  const auto& G = gens();
  for (const char* s : {"h", "hhat", "htilde"}) {
    auto m = G.get(s, 1);
    for (double k : {2.0, 3.0, 8.0, 12.0}) {
      EXPECT_NEAR(level_of(m->apply(Point::level(k))), k, 1e-15) << s;
      EXPECT_NEAR(m->jet(Point::level(k)).L, 0.0, 1e-9) << s << " " << k;
      EXPECT_NEAR(m->jet(Point::level(std::nextafter(k, 0.0))).L, 0.0, 1e-6) << s << " " << k;
    }
  }
}

TEST(TimeLaw, ZeroDilationCommutes) {
  std::vector<double> v{0.1, 0.3, 0.5, 0.7, 0.9};
  auto r = commutator_time_law(gens().cells, 0.0, 0.6, v);
  EXPECT_LT(r.commutator, 1e-14);
  EXPECT_LT(r.signal, 1e-14);
  EXPECT_LT(r.conjugation, 1e-14);
}

TEST(TimeLaw, UnitTimes) {
  std::vector<double> v{0.05, 0.2, 0.5, 0.8, 0.95};
  auto r = commutator_time_law(gens().cells, 1.0, 1.0, v);
  EXPECT_LT(r.conjugation, 1e-10);
  EXPECT_LT(r.commutator, 1e-10);
  // only v near 1/2 moves: a unit level shift there is about 1e-5 of the cell
  EXPECT_GT(r.signal, 1e-7);
}

TEST(TimeLaw, FirstActiveBlock) {
  // l = 4: t = 1/2, s = log2(1 - 1/2) = -1, commutator equals Y^{1/4}.
  TimeSequences ts{EllSequence(Variant::sec2)};
  ASSERT_EQ(ts.t(2.0), 0.5);
  ASSERT_EQ(ts.s(2.0), -1.0);
  std::vector<double> v{0.1, 0.4, 0.6, 0.9};
  auto r = commutator_time_law(gens().cells, ts.s(2.0), ts.t(2.0), v);
  EXPECT_LT(r.commutator, 1e-10);
  auto rc = commutator_time_law_chart(gens().chart, ts.s(2.0), ts.t(2.0), {-20.0, -0.3, 0.6, 50.0});
  EXPECT_LT(rc.commutator, 1e-10);
}

TEST(Sequences, Sec2Values) {
  EllSequence e(Variant::sec2);
  EXPECT_EQ(e.ell(1), 4u);
  EXPECT_EQ(e.ell(2), 4u);
  EXPECT_EQ(e.ell(3), 8u);
  EXPECT_EQ(e.ell(10), 10486u);
  EXPECT_THROW(e.ell(0), std::domain_error);
  EXPECT_THROW(e.ell(32), std::overflow_error);
  EXPECT_THROW(e.L(2), std::logic_error);
}

TEST(Sequences, Sec3Values) {
  EllSequence e(Variant::sec3);
  EXPECT_EQ(EllSequence::m(1), 1);
  EXPECT_EQ(EllSequence::m(10), 7);
  EXPECT_EQ(e.ell(1), 4u);
  EXPECT_EQ(e.ell(10), 16384u);
  EXPECT_EQ(e.L(20), 1792u);
  for (int i = 2; i <= 60; i += 2) {
    double s = e.sqrt_ell(i / 2);
    EXPECT_EQ(static_cast<double>(e.L(i)), s * std::log2(s * s)) << i;
  }
  EXPECT_THROW(e.L(3), std::domain_error);
  EXPECT_THROW(e.ell(40), std::overflow_error);
}

TEST(Sequences, SqrtEllAgreesWithExact) {
  for (auto v : {Variant::sec2, Variant::sec3})
    for (int j = 1; j <= (v == Variant::sec2 ? 31 : 20); ++j) {
      EllSequence e(v);
      EXPECT_NEAR(e.sqrt_ell(j) / std::sqrt(static_cast<double>(e.ell(j))), 1.0, 1e-15);
    }
}

TEST(Sequences, Blocks) {
  EXPECT_EQ(TimeSequences::block(0.5), 0);
  EXPECT_EQ(TimeSequences::block(1.0), 1);
  EXPECT_EQ(TimeSequences::block(3.9), 2);
  EXPECT_EQ(TimeSequences::block(4.0), 3);
  EXPECT_TRUE(TimeSequences::active(2.0));
  EXPECT_FALSE(TimeSequences::active(5.0));
  EXPECT_TRUE(TimeSequences::active(9.0));
  EXPECT_EQ(parse_variant("sec3"), Variant::sec3);
  EXPECT_THROW(parse_variant("sec4"), std::invalid_argument);
}

TEST(Flow, QuadratureMatchesClosedForm) {
  auto cc = gens().cells;
  for (auto kind : {FieldKind::translation, FieldKind::dilation})
    for (auto F : {FlowField{kind, Conjugation::fundamental, 0}, FlowField{kind, Conjugation::cell, 5}}) {
      double base = static_cast<double>(F.support_cell());
      for (double v : {0.1, 0.5, 0.85})
        for (double t : {0.25, 1.0, -0.6}) {
          Point p = Point::level(base + v);
          EXPECT_NEAR(flow_log_deriv_quadrature(cc, F, t, p), flow_log_deriv(cc, F, t, p), 1e-8)
              << to_string(kind) << " v=" << v << " t=" << t;
        }
    }
}
