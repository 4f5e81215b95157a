#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "diffeo.hpp"

namespace dlab {

// Translation: time-1 map x -> x + 1. Dilation: time-1 map x -> 2x.
enum class FieldKind { translation, dilation };

inline const char* to_string(FieldKind k) { return k == FieldKind::translation ? "translation" : "dilation"; }

// Flows on the line.
inline double line_flow(FieldKind k, double t, double u) {
  return k == FieldKind::translation ? u + t : std::exp2(t) * u;
}
inline double line_flow_log_deriv(FieldKind k, double t) { return k == FieldKind::translation ? 0.0 : t * ln2; }

// Field value and first two derivatives at a point.
struct FieldJet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Field in x-coordinates whose pushforward by a chart C is X. X is taken at C(x);
// (L, A, DA) is the chart's jet at x.
inline FieldJet pullback(const FieldJet& X, double L, double A, double DA) {
  if (X.v == 0.0 && X.d1 == 0.0 && X.d2 == 0.0) return {};
  double c1 = std::exp(L);
  FieldJet r;
  r.v = X.v / c1;
  r.d1 = X.d1 - X.v * A / c1;
  r.d2 = X.d2 * c1 - X.d1 * A - X.v * (DA - A * A) / c1;
  return r;
}

// ---- tails in the variable q = 1/x (left) or 1/(1-x) (right) ----

namespace detail {
// Tail parameter of an interior point whose level is beyond the tail threshold.
struct TailPos {
  int sign;  // -1 left tail, +1 right tail
  double q;
};

inline std::optional<TailPos> tail_pos(const Chart& c, const Point& p) {
  if (p.is_level()) {
    double u = p.u();
    if (std::fabs(u) < c.tail_level()) return std::nullopt;
    return TailPos{u > 0 ? 1 : -1, std::log(std::log(std::fabs(u)))};
  }
  if (!p.interior()) return std::nullopt;
  if (p.has_complement() || p.x() > 0.5) {
    double w = c.complement(p);
    if (w > c.config().delta) return std::nullopt;
    return TailPos{1, 1.0 / w};
  }
  if (p.x() > c.config().delta) return std::nullopt;
  return TailPos{-1, 1.0 / p.x()};
}

// Jet of Psi = ln|Phi| in a tail; Psi is the coordinate in which dilation is translation.
inline ChartJet psi_jet(const TailPos& t) {
  double q = t.q;
  ChartJet j;
  j.L = q + 2.0 * std::log(q);
  j.A = t.sign * (q * q + 2.0 * q);
  j.DA = 2.0 * q * q * q + 2.0 * q * q;
  j.S = j.DA - 0.5 * j.A * j.A;
  return j;
}

inline Jet conj_jet(const ChartJet& cp, const ChartJet& cq, double Lm, double Am, double Sm) {
  Jet j;
  double c1 = std::exp(cp.L);
  j.L = cp.L + Lm - cq.L;
  double df = std::exp(j.L);
  j.A = cp.A + (Am == 0.0 ? 0.0 : Am * c1) - cq.A * df;
  j.S = cp.S + (Sm == 0.0 ? 0.0 : Sm * c1 * c1) - cq.S * df * df;
  return j;
}
}  // namespace detail

// ---- flows of the chart-conjugated fields on (0,1) ----

// Phi^{-1} o (line flow) o Phi on (0,1), identity elsewhere.
inline Point chart_flow_point(const Chart& c, FieldKind kind, double t, const Point& p0) {
  if (t == 0.0 || !p0.interior()) return p0;
  Point p = c.canonical(p0);
  if (p.is_level()) {
    double r = line_flow(kind, t, p.u());
    return c.canonical(Point::level(r));
  }
  if (kind == FieldKind::translation) return p;
  // Far point: ln|level| moves by t ln 2.
  auto tp = detail::tail_pos(c, p);
  double q = tp->q;
  double shift = t * ln2;
  double E = std::exp(q);
  if (std::isfinite(E) && E + shift <= std::log(c.overflow_level())) return Point::level(tp->sign * std::exp(E + shift));
  double q2 = q + std::log1p(shift * std::exp(-q));
  return tp->sign > 0 ? Point::near_one(1.0 / q2) : Point::ambient(1.0 / q2);
}

inline Jet chart_flow_jet(const Chart& c, FieldKind kind, double t, const Point& p0) {
  if (t == 0.0 || !p0.interior()) return {};
  Point p = c.canonical(p0);
  if (!p.is_level() && kind == FieldKind::translation) return {};
  Point q = chart_flow_point(c, kind, t, p);
  if (!p.is_level() || !q.is_level()) {
    auto tp = detail::tail_pos(c, p), tq = detail::tail_pos(c, q);
    if (tp && tq) return detail::conj_jet(detail::psi_jet(*tp), detail::psi_jet(*tq), 0.0, 0.0, 0.0);
  }
  return detail::conj_jet(c.jet(p), c.jet(q), line_flow_log_deriv(kind, t), 0.0, 0.0);
}

class ChartFlowMap final : public Diffeo {
 public:
  ChartFlowMap(ChartPtr c, FieldKind kind, double t, std::string label = "")
      : Diffeo(std::move(c)), kind_(kind), t_(t), label_(std::move(label)) {}

  std::string name() const override {
    if (!label_.empty()) return label_;
    return std::string(kind_ == FieldKind::translation ? "Y" : "Yhat") + "^" + std::to_string(t_);
  }
  Point apply(const Point& p) const override { return chart_flow_point(*chart_, kind_, t_, p); }
  Jet jet(const Point& p) const override { return chart_flow_jet(*chart_, kind_, t_, p); }
  DiffeoPtr inverse() const override {
    std::string l = label_.empty() ? "" : label_ + "^-1";
    return std::make_shared<ChartFlowMap>(chart_, kind_, -t_, l);
  }
  FieldKind kind() const { return kind_; }
  double time() const { return t_; }

 private:
  FieldKind kind_;
  double t_;
  std::string label_;
};

// ---- the fundamental domain I = [x_0, x_1] and its chart kappa ----

// kappa sends the level v in [0,1] to z = (x - x_0)/|I| in [0,1].
class CellChart {
 public:
  explicit CellChart(ChartPtr c) : c_(std::move(c)) {
    xi1_ = c_->phi_inv_centered(1.0);
    len_ = xi1_;
    log_len_ = std::log(len_);
  }

  const Chart& chart() const { return *c_; }
  double length() const { return len_; }

  // z as a point of (0,1), canonicalised (levels where representable).
  Point kappa(double v) const {
    double y = c_->phi_inv_centered(v);
    double z = y / len_;
    if (z <= 0.5) return c_->canonical(Point::ambient(z));
    return c_->canonical(Point::near_one((xi1_ - y) / len_));
  }

  double kappa_inv(const Point& z) const {
    if (c_->side(z) <= 0) return c_->phi_centered(len_ * c_->ambient(z));
    return c_->phi_centered(xi1_ - len_ * c_->complement(z));
  }

  // Jet of kappa at the level v.
  ChartJet jet(double v) const {
    ChartJet p = c_->jet_level(v);
    ChartJet k;
    double e = std::exp(-p.L);
    k.L = -p.L - log_len_;
    k.A = -p.A * e;
    k.DA = -(p.DA - p.A * p.A) * e * e;
    k.S = -p.S * e * e;
    return k;
  }

 private:
  ChartPtr c_;
  double xi1_ = 0.0;
  double len_ = 0.0;
  double log_len_ = 0.0;
};

using CellChartPtr = std::shared_ptr<const CellChart>;

// Chart-conjugated field on (0,1) (Y or Yhat) with two derivatives, at a point of (0,1).
inline FieldJet chart_field(const Chart& c, FieldKind kind, const Point& p0) {
  if (!p0.interior()) return {};
  Point p = c.canonical(p0);
  auto tp = detail::tail_pos(c, p);
  if (kind == FieldKind::translation) {
    ChartJet j = c.jet(p);
    if (j.L > 700.0) return {};
    double e = std::exp(-j.L);
    return {e, -j.A * e, (j.A * j.A - j.DA) * e};
  }
  if (tp) {
    double w = 1.0 / tp->q;
    double e = std::exp(-tp->q);
    if (tp->sign > 0) return {ln2 * w * w * e, -ln2 * (2 * w + 1) * e, ln2 * (2 + (2 * w + 1) / (w * w)) * e};
    return {-ln2 * w * w * e, -ln2 * (2 * w + 1) * e, -ln2 * (2 + (2 * w + 1) / (w * w)) * e};
  }
  // Blend region: ln2 Phi / Phi'.
  ChartJet j = c.jet(p);
  double u = p.u();
  double r = u * std::exp(-j.L);
  return {ln2 * r, ln2 * (1.0 - r * j.A), -ln2 * (j.A + r * (j.DA - j.A * j.A))};
}

// ---- the cell maps G_t = kappa^{-1} o (time-t flow on the unit interval) o kappa ----

class CellMap {
 public:
  CellMap(CellChartPtr cc, FieldKind kind, double t) : cc_(std::move(cc)), kind_(kind), t_(t) {}

  double time() const { return t_; }
  FieldKind kind() const { return kind_; }

  double apply(double v) const {
    if (t_ == 0.0 || v <= 0.0 || v >= 1.0) return v;
    Point z = cc_->kappa(v);
    if (!z.is_level()) return v;  // flat end: displacement below any representable amount
    Point z2 = chart_flow_point(cc_->chart(), kind_, t_, z);
    if (!z2.is_level()) return v;
    return cc_->kappa_inv(z2);
  }

  // Level jet of G_t at v.
  Jet jet(double v) const {
    if (t_ == 0.0 || v <= 0.0 || v >= 1.0) return {};
    Point z = cc_->kappa(v);
    if (!z.is_level()) return {};
    Point z2 = chart_flow_point(cc_->chart(), kind_, t_, z);
    if (!z2.is_level()) return {};
    double v2 = cc_->kappa_inv(z2);
    Jet y = detail::conj_jet(cc_->chart().jet(z), cc_->chart().jet(z2), line_flow_log_deriv(kind_, t_), 0, 0);
    return detail::conj_jet(cc_->jet(v), cc_->jet(v2), y.L, y.A, y.S);
  }

  // Field generating G in level coordinates, at v.
  FieldJet level_field(double v) const { return level_field(*cc_, kind_, v); }

  static FieldJet level_field(const CellChart& cc, FieldKind kind, double v) {
    if (v <= 0.0 || v >= 1.0) return {};
    Point z = cc.kappa(v);
    if (!z.is_level()) return {};
    ChartJet k = cc.jet(v);
    return pullback(chart_field(cc.chart(), kind, z), k.L, k.A, k.DA);
  }

 private:
  CellChartPtr cc_;
  FieldKind kind_;
  double t_;
};

// Map acting on each cell [k, k+1) of levels by k + G_{t(k)}(u - k); identity
// off (0,1), at far points, and on cells with zero time.
class CellwiseFlow final : public Diffeo {
 public:
  using TimeFn = std::function<double(long long)>;

  CellwiseFlow(CellChartPtr cc, FieldKind kind, TimeFn times, std::string label)
      : Diffeo(std::shared_ptr<const Chart>(cc, &cc->chart())), cc_(std::move(cc)), kind_(kind),
        times_(std::move(times)), label_(std::move(label)) {}

  std::string name() const override { return label_; }

  // Level cell and offset, if the point is in a cell where the map may act.
  struct Cell {
    long long k;
    double v;
    double t;
  };
  std::optional<Cell> locate(const Point& p0) const {
    if (!p0.interior()) return std::nullopt;
    Point p = chart_->canonical(p0);
    if (!p.is_level()) return std::nullopt;
    double u = p.u();
    if (std::fabs(u) >= 4503599627370496.0) return std::nullopt;  // 2^52: no room inside a cell
    double kf = std::floor(u);
    auto k = static_cast<long long>(kf);
    double t = times_(k);
    if (t == 0.0) return std::nullopt;
    return Cell{k, u - kf, t};
  }

  Point apply(const Point& p) const override {
    auto c = locate(p);
    if (!c) return p;
    CellMap g(cc_, kind_, c->t);
    return Point::level(static_cast<double>(c->k) + g.apply(c->v));
  }

  Jet jet(const Point& p) const override {
    auto c = locate(p);
    if (!c) return {};
    CellMap g(cc_, kind_, c->t);
    Jet m = g.jet(c->v);
    Point q = apply(p);
    return level_map_jet(*chart_, chart_->canonical(p), q, m.L, m.A, m.S);
  }

  DiffeoPtr inverse() const override {
    auto t = times_;
    std::string l = label_.size() > 3 && label_.substr(label_.size() - 3) == "^-1" ? label_.substr(0, label_.size() - 3)
                                                                                     : label_ + "^-1";
    return std::make_shared<CellwiseFlow>(cc_, kind_, [t](long long k) { return -t(k); }, l);
  }

  // Same pasting with every time multiplied by e.
  std::shared_ptr<const CellwiseFlow> scaled(double e, std::string label) const {
    auto t = times_;
    return std::make_shared<CellwiseFlow>(cc_, kind_, [t, e](long long k) { return e * t(k); }, std::move(label));
  }

  FieldKind kind() const { return kind_; }
  double time_at(long long k) const { return times_(k); }
  const CellChart& cell_chart() const { return *cc_; }

 private:
  CellChartPtr cc_;
  FieldKind kind_;
  TimeFn times_;
  std::string label_;
};

// ---- fields and flows by conjugation type ----

enum class Conjugation { none, chart, fundamental, cell };

struct FlowField {
  FieldKind kind = FieldKind::translation;
  Conjugation conj = Conjugation::chart;
  long long cell = 0;  // used by Conjugation::cell

  long long support_cell() const { return conj == Conjugation::fundamental ? 0 : cell; }
};

inline DiffeoPtr flow(const CellChartPtr& cc, const FlowField& F, double t) {
  ChartPtr c(cc, &cc->chart());
  switch (F.conj) {
    case Conjugation::none:
      throw std::invalid_argument("flow: unconjugated fields act on the line; use line_flow");
    case Conjugation::chart:
      return std::make_shared<ChartFlowMap>(c, F.kind, t);
    default: {
      long long k0 = F.support_cell();
      std::string label = std::string(F.kind == FieldKind::translation ? "Z" : "Zhat") + "[" + std::to_string(k0) +
                          "]^" + std::to_string(t);
      return std::make_shared<CellwiseFlow>(cc, F.kind, [k0, t](long long k) { return k == k0 ? t : 0.0; }, label);
    }
  }
}

// Ambient field and two derivatives at a point.
inline FieldJet field_jet(const CellChart& cc, const FlowField& F, const Point& p0) {
  const Chart& c = cc.chart();
  if (F.conj == Conjugation::none) throw std::invalid_argument("field_jet: unconjugated field has no ambient form");
  if (F.conj == Conjugation::chart) return chart_field(c, F.kind, p0);
  if (!p0.interior()) return {};
  Point p = c.canonical(p0);
  if (!p.is_level()) return {};
  double kf = std::floor(p.u());
  if (static_cast<long long>(kf) != F.support_cell()) return {};
  FieldJet lv = CellMap::level_field(cc, F.kind, p.u() - kf);
  ChartJet j = c.jet_level(p.u());
  return pullback(lv, j.L, j.A, j.DA);
}

// log D of the time-t flow at p, as the integral of D(field) along the orbit.
inline double flow_log_deriv_quadrature(const CellChartPtr& cc, const FlowField& F, double t, const Point& p,
                                        double tol = 1e-11) {
  if (t == 0.0) return 0.0;
  auto integrand = [&](double s) {
    Point ps = flow(cc, F, s)->apply(p);
    return field_jet(*cc, F, ps).d1;
  };
  double a = std::min(0.0, t), b = std::max(0.0, t);
  double v = integrate_adaptive(integrand, a, b, tol).first;
  return t > 0 ? v : -v;
}

inline double flow_log_deriv(const CellChartPtr& cc, const FlowField& F, double t, const Point& p) {
  return flow(cc, F, t)->jet(p).L;
}

}  // namespace dlab
