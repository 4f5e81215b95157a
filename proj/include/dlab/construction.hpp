#pragma once

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "flow.hpp"
#include "sequences.hpp"
#include "smoothstep.hpp"

namespace dlab {

// ---- psi ----
//
// Monotone bridges between the anchors
//   -1 -> -1,  x_{-3/4} -> 0,  x_{-1/2} -> x_{-1/2},  x_0 -> x_0,  x_1 -> 1,  2 -> 2,
// identity on [x_{-1/2}, x_0]. On a bridge of input width W and output width R W,
// with s = (x - a)/W, psi = out_a + W Q(s) where
//   Q(s) = (1 - B(s)) m_a s + B(s) (R - m_b (1 - s)),
// B the flat step, m_a, m_b the end slopes. All derivatives of order >= 2 vanish at
// the anchors, so the pieces join smoothly.
class Psi final : public Diffeo {
 public:
  explicit Psi(ChartPtr c) : Diffeo(std::move(c)) {
    xi34_ = chart_->phi_inv_centered(-0.75);
    xi12_ = chart_->phi_inv_centered(-0.5);
    xi1_ = chart_->phi_inv_centered(1.0);
    b_[0] = {1.5 + xi34_, 0.5, 0.5};
    b_[1] = {xi12_ - xi34_, 0.5, 1.0};
    b_[3] = {xi1_, 1.0, 0.5};
    b_[4] = {1.5 - xi1_, 0.5, 0.5};
    b_[0].R = 1.0 / b_[0].W;
    b_[1].R = (0.5 + xi12_) / b_[1].W;
    b_[3].R = 0.5 / b_[3].W;
    b_[4].R = 1.0 / b_[4].W;
    for (int k : {0, 1, 3, 4})
      if (!(b_[k].R > std::max(b_[k].ma, b_[k].mb))) throw std::logic_error("psi: bridge would not be monotone");
  }

  std::string name() const override { return "psi"; }

  struct BridgeParams {
    double W = 0.0;
    double ma = 0.0;
    double mb = 0.0;
    double R = 0.0;
  };
  const BridgeParams& bridge(int k) const { return b_[k]; }

  // Anchors x_{-3/4}, x_{-1/2}, x_1 as centered coordinates.
  double xi_m34() const { return xi34_; }
  double xi_m12() const { return xi12_; }
  double xi_1() const { return xi1_; }

  Point apply(const Point& p) const override {
    int k = input_bridge(p);
    if (k < 0 || k == 2) return p;
    auto [s, sc] = input_offsets(k, p);
    return output(k, s, sc);
  }

  Jet jet(const Point& p) const override {
    int k = input_bridge(p);
    if (k < 0 || k == 2) return {};
    auto [s, sc] = input_offsets(k, p);
    const auto& b = b_[k];
    StepJet B = step_jet(s, sc);
    double dd = b.mb - b.ma;
    double d = b.R - b.mb + dd * s;
    double q1 = b.ma + B.d1 * d + B.value * dd;
    double q2 = B.d2 * d + 2.0 * B.d1 * dd;
    double q3 = B.d3 * d + 3.0 * B.d2 * dd;
    Jet j;
    j.L = std::log(q1);
    j.A = q2 / (q1 * b.W);
    j.S = q3 / (q1 * b.W * b.W) - 1.5 * j.A * j.A;
    return j;
  }

  DiffeoPtr inverse() const override;

  // psi^{-1} by bisection of the bridge profile to adjacent doubles.
  Point apply_inverse(const Point& y) const {
    int k = output_bridge(y);
    if (k < 0 || k == 2) return y;
    const auto& b = b_[k];
    auto [qb, qt] = output_offsets(k, y);
    double half = profile_bottom(k, 0.5, 0.5);
    if (qb <= half) {
      double s = solve(0.0, 0.5, [&](double s) { return profile_bottom(k, s, 1.0 - s) - qb; });
      return input_point(k, s, false);
    }
    double sg = solve(0.0, 0.5, [&](double sg) { return profile_top(k, 1.0 - sg, sg) - qt; });
    (void)b;
    return input_point(k, sg, true);
  }

 private:
  // Q(s) and R - Q(s), each in its cancellation-free form.
  double profile_bottom(int k, double s, double sc) const {
    const auto& b = b_[k];
    double B = step(s, sc);
    return (1.0 - B) * b.ma * s + B * (b.R - b.mb * sc);
  }
  double profile_top(int k, double s, double sc) const {
    const auto& b = b_[k];
    double Bc = step(sc, s);  // 1 - B
    return Bc * (b.R - b.ma * s) + (1.0 - Bc) * b.mb * sc;
  }

  // Root of an increasing (bottom) or decreasing (top) function on [lo, hi].
  template <class F>
  static double solve(double lo, double hi, F&& f) {
    double flo = f(lo);
    bool increasing = f(hi) > flo;
    for (int it = 0; it < 200; ++it) {
      double m = detail::ordered_mid(lo, hi);
      if (m == lo || m == hi) break;
      double fm = f(m);
      if (fm == 0.0) return m;
      if ((fm < 0.0) == increasing)
        lo = m;
      else
        hi = m;
    }
    return std::fabs(f(lo)) <= std::fabs(f(hi)) ? lo : hi;
  }

  // -1: outside [-1, 2]; 0, 1, 3, 4: bridges; 2: identity piece.
  int input_bridge(const Point& p) const {
    const Chart& c = *chart_;
    double x = c.ambient(p);
    if (!p.interior() && (x < -1.0 || x > 2.0)) return -1;
    if (c.compare(p, Point::level(-0.75)) <= 0) return 0;
    if (c.compare(p, Point::level(-0.5)) <= 0) return 1;
    if (c.compare(p, Point::level(0.0)) <= 0) return 2;
    if (c.compare(p, Point::level(1.0)) <= 0) return 3;
    return 4;
  }

  int output_bridge(const Point& y) const {
    const Chart& c = *chart_;
    double x = c.ambient(y);
    if (!y.interior() && (x < -1.0 || x > 2.0)) return -1;
    if (!y.interior() && x <= 0.0) return 0;
    if (c.compare(y, Point::level(-0.5)) <= 0) return 1;
    if (c.compare(y, Point::level(0.0)) <= 0) return 2;
    if (y.interior()) return 3;
    return 4;
  }

  std::pair<double, double> input_offsets(int k, const Point& p) const {
    const Chart& c = *chart_;
    double xi = c.centered(p);
    const auto& b = b_[k];
    switch (k) {
      case 0:
        return {(1.5 + xi) / b.W, (xi34_ - xi) / b.W};
      case 1:
        return {(xi - xi34_) / b.W, (xi12_ - xi) / b.W};
      case 3:
        return {xi / b.W, (xi1_ - xi) / b.W};
      default:
        return {(xi - xi1_) / b.W, (1.5 - xi) / b.W};
    }
  }

  std::pair<double, double> output_offsets(int k, const Point& y) const {
    const Chart& c = *chart_;
    const auto& b = b_[k];
    switch (k) {
      case 0: {
        double x = c.ambient(y);
        return {(x + 1.0) / b.W, -x / b.W};
      }
      case 1:
        return {c.ambient(y) / b.W, (xi12_ - c.centered(y)) / b.W};
      case 3:
        return {c.centered(y) / b.W, c.complement(y) / b.W};
      default: {
        double x = c.ambient(y);
        double above = y.has_complement() ? -y.w() : x - 1.0;
        return {above / b.W, (2.0 - x) / b.W};
      }
    }
  }

  Point point_from_centered(double xi) const {
    if (xi <= -0.5 || xi >= 0.5) return Point::ambient(0.5 + xi);
    return chart_->from_centered(xi);
  }

  Point output(int k, double s, double sc) const {
    const Chart& c = *chart_;
    const auto& b = b_[k];
    bool top = s > 0.5;
    double v = top ? b.W * profile_top(k, s, sc) : b.W * profile_bottom(k, s, sc);
    switch (k) {
      case 0:
        return Point::ambient(top ? -v : -1.0 + v);
      case 1:
        return top ? c.from_centered(xi12_ - v) : c.canonical(Point::ambient(v));
      case 3:
        return top ? c.canonical(Point::near_one(v)) : c.from_centered(v);
      default:
        // 1 + v kept as the exact offset v.
        return top ? Point::ambient(2.0 - v) : Point::near_one(-v);
    }
  }

  // Input point at offset s from the left anchor, or sc from the right one.
  Point input_point(int k, double off, bool from_right) const {
    const auto& b = b_[k];
    double d = b.W * off;
    switch (k) {
      case 0:
        return from_right ? point_from_centered(xi34_ - d) : Point::ambient(-1.0 + d);
      case 1:
        return chart_->from_centered(from_right ? xi12_ - d : xi34_ + d);
      case 3:
        return chart_->from_centered(from_right ? xi1_ - d : d);
      default:
        return from_right ? Point::ambient(2.0 - d) : point_from_centered(xi1_ + d);
    }
  }

  std::array<BridgeParams, 5> b_{};
  double xi34_ = 0.0, xi12_ = 0.0, xi1_ = 0.0;
};

class PsiInverse final : public Diffeo {
 public:
  explicit PsiInverse(std::shared_ptr<const Psi> psi) : Diffeo(psi->chart_ptr()), psi_(std::move(psi)) {}
  std::string name() const override { return "psi^-1"; }
  Point apply(const Point& p) const override { return psi_->apply_inverse(p); }
  Jet jet(const Point& p) const override { return invert_jet(psi_->jet(psi_->apply_inverse(p))); }
  DiffeoPtr inverse() const override { return psi_; }

 private:
  std::shared_ptr<const Psi> psi_;
};

inline DiffeoPtr Psi::inverse() const {
  return std::make_shared<PsiInverse>(std::static_pointer_cast<const Psi>(shared_from_this()));
}

// ---- generators ----

enum class PastedKind { h, hhat, htilde };

inline DiffeoPtr make_f(const ChartPtr& c) { return std::make_shared<ChartFlowMap>(c, FieldKind::translation, 1.0, "f"); }
inline DiffeoPtr make_fhat(const ChartPtr& c) { return std::make_shared<ChartFlowMap>(c, FieldKind::dilation, 1.0, "fhat"); }

// g = phi_0^{-1} f phi_0 on I = [x_0, x_1], identity elsewhere.
inline DiffeoPtr make_g(const CellChartPtr& cc) {
  return std::make_shared<CellwiseFlow>(cc, FieldKind::translation, [](long long k) { return k == 0 ? 1.0 : 0.0; }, "g");
}

inline DiffeoPtr make_psi(const ChartPtr& c) { return std::make_shared<Psi>(c); }

inline DiffeoPtr make_pasted(const CellChartPtr& cc, PastedKind which, const EllSequence& ell) {
  TimeSequences ts(ell);
  switch (which) {
    case PastedKind::h:
      return std::make_shared<CellwiseFlow>(cc, FieldKind::translation,
                                            [ts](long long k) { return ts.t(static_cast<double>(k)); }, "h");
    case PastedKind::hhat:
      return std::make_shared<CellwiseFlow>(cc, FieldKind::dilation,
                                            [ts](long long k) { return ts.s(static_cast<double>(k)); }, "hhat");
    default:
      return std::make_shared<CellwiseFlow>(cc, FieldKind::dilation,
                                            [ts](long long k) { return ts.r(static_cast<double>(k)); }, "htilde");
  }
}

inline const std::vector<std::string>& generator_symbols() {
  static const std::vector<std::string> syms{"fhat", "f", "g", "h", "hhat", "htilde", "psi"};
  return syms;
}

struct GeneratorSet {
  ChartPtr chart;
  CellChartPtr cells;
  EllSequence ell;
  std::map<std::string, DiffeoPtr> maps;
  std::map<std::string, DiffeoPtr> inverses;

  const DiffeoPtr& get(const std::string& sym, int sign) const {
    const auto& m = sign > 0 ? maps : inverses;
    auto it = m.find(sym);
    if (it == m.end()) throw std::invalid_argument("unknown generator '" + sym + "'");
    return it->second;
  }
};

inline GeneratorSet make_generators(const ChartConfig& cfg, Variant variant) {
  GeneratorSet G;
  G.chart = std::make_shared<Chart>(cfg);
  G.cells = std::make_shared<CellChart>(G.chart);
  G.ell = EllSequence(variant);
  G.maps["f"] = make_f(G.chart);
  G.maps["fhat"] = make_fhat(G.chart);
  G.maps["g"] = make_g(G.cells);
  G.maps["h"] = make_pasted(G.cells, PastedKind::h, G.ell);
  G.maps["hhat"] = make_pasted(G.cells, PastedKind::hhat, G.ell);
  G.maps["htilde"] = make_pasted(G.cells, PastedKind::htilde, G.ell);
  G.maps["psi"] = make_psi(G.chart);
  for (const auto& [k, m] : G.maps) G.inverses[k] = m->inverse();
  return G;
}

// ---- commutator time law ----

struct TimeLawReport {
  double conjugation = 0.0;  // Yhat^s Y^t Yhat^-s against Y^{2^s t}
  double commutator = 0.0;   // [Y^t, Yhat^s] against Y^{t (1 - 2^s)}
  double signal = 0.0;       // largest displacement of the commutator itself
};

// On the common cell [0,1] of levels, at the offsets v.
inline TimeLawReport commutator_time_law(const CellChartPtr& cc, double s, double t, const std::vector<double>& v) {
  CellMap Yt(cc, FieldKind::translation, t), Ymt(cc, FieldKind::translation, -t);
  CellMap Ys(cc, FieldKind::dilation, s), Yms(cc, FieldKind::dilation, -s);
  CellMap Yc(cc, FieldKind::translation, std::exp2(s) * t);
  CellMap Yk(cc, FieldKind::translation, t * (1.0 - std::exp2(s)));
  TimeLawReport r;
  for (double x : v) {
    double a = Ys.apply(Yt.apply(Yms.apply(x)));
    r.conjugation = std::max(r.conjugation, std::fabs(a - Yc.apply(x)));
    double b = Yt.apply(Ys.apply(Ymt.apply(Yms.apply(x))));
    r.commutator = std::max(r.commutator, std::fabs(b - Yk.apply(x)));
    r.signal = std::max(r.signal, std::fabs(b - x));
  }
  return r;
}

// Same laws for the chart flows on (0,1), compared in level coordinates
// relative to max(1, |level|), at the given levels.
inline TimeLawReport commutator_time_law_chart(const ChartPtr& c, double s, double t, const std::vector<double>& levels) {
  ChartFlowMap Yt(c, FieldKind::translation, t), Ymt(c, FieldKind::translation, -t);
  ChartFlowMap Ys(c, FieldKind::dilation, s), Yms(c, FieldKind::dilation, -s);
  ChartFlowMap Yc(c, FieldKind::translation, std::exp2(s) * t);
  ChartFlowMap Yk(c, FieldKind::translation, t * (1.0 - std::exp2(s)));
  TimeLawReport r;
  auto lv = [&](const Point& p) { return c->canonical(p).u(); };
  for (double u : levels) {
    Point p = Point::level(u);
    double sc = std::max(1.0, std::fabs(u));
    double a = lv(Ys.apply(Yt.apply(Yms.apply(p))));
    r.conjugation = std::max(r.conjugation, std::fabs(a - lv(Yc.apply(p))) / sc);
    double b = lv(Yt.apply(Ys.apply(Ymt.apply(Yms.apply(p)))));
    r.commutator = std::max(r.commutator, std::fabs(b - lv(Yk.apply(p))) / sc);
    r.signal = std::max(r.signal, std::fabs(b - u) / sc);
  }
  return r;
}

}  // namespace dlab
