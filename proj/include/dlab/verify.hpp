#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "words.hpp"

namespace dlab {

inline constexpr std::uint64_t default_seed = 0xD15704;

// ---- helpers ----

// max |fn| over a uniform grid of (lo, hi), refined by golden section around the best node.
template <class F>
std::pair<double, double> grid_sup(F&& fn, double lo, double hi, std::size_t n, bool refine = true) {
  double best_x = lo, best = -1.0;
  std::size_t best_k = 0;
  double step = (hi - lo) / static_cast<double>(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    double x = lo + step * static_cast<double>(k);
    double y = std::fabs(fn(x));
    if (y > best) {
      best = y;
      best_x = x;
      best_k = k;
    }
  }
  if (refine && best > 0.0) {
    double a = lo + step * static_cast<double>(best_k - 1), b = lo + step * static_cast<double>(best_k + 1);
    auto [x, y] = golden_max([&](double s) { return std::fabs(fn(s)); }, a, b, 50);
    if (y > best) {
      best = y;
      best_x = x;
    }
  }
  return {best_x, best};
}

// Levels sinh(s), s uniform, spanning [-M, M]; increasing.
inline std::vector<Point> sinh_level_grid(const Chart& c, std::size_t n, double lo_level, double hi_level) {
  std::vector<Point> pts;
  double a = std::asinh(lo_level), b = std::asinh(hi_level);
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) pts.push_back(Point::level(std::sinh(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1))));
  (void)c;
  return pts;
}

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_slope(x.data(), y.data(), std::min(x.size(), y.size()));
}

// Level difference relative to max(1, |level|) when both points carry levels,
// ambient difference otherwise.
inline double displacement(const Chart& c, const Point& a0, const Point& b0) {
  Point a = c.canonical(a0), b = c.canonical(b0);
  if (a.is_level() && b.is_level()) return std::fabs(a.u() - b.u()) / std::max({1.0, std::fabs(a.u()), std::fabs(b.u())});
  return c.ambient_distance(a, b);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- identity ----

struct IdentityReport {
  int i = 0;
  Variant variant = Variant::sec2;
  std::string orientation;
  std::size_t samples = 0;
  std::uint64_t word_length = 0;
  double discrepancy = 0.0;         // fbar^{n/2} against the word, level units
  double h_half_discrepancy = 0.0;  // word for h_{n/2} against f^{-n/2} f^{-1} fbar^{n/2} f
  double signal = 0.0;              // largest deviation of fbar^{n/2} from f^{n/2}
  double tol = 1e-6;
  double h_tol = 1e-8;
  double seconds = 0.0;
  bool pass = false;
};

// Levels uniform on [-2n, 2n], plus ambient points of [-1, 0) and (1, 2].
inline std::vector<Point> identity_grid(double n, std::size_t count) {
  std::vector<Point> pts;
  std::size_t outside = count / 10;
  std::size_t inside = count - outside;
  for (std::size_t k = 0; k < inside; ++k)
    pts.push_back(Point::level(-2.0 * n + 4.0 * n * (static_cast<double>(k) + 0.5) / static_cast<double>(inside)));
  for (std::size_t k = 0; k < outside; ++k) {
    double s = (static_cast<double>(k / 2) + 0.5) / static_cast<double>((outside + 1) / 2);
    pts.push_back(Point::ambient(k % 2 ? 1.0 + s : -s));
  }
  return pts;
}

inline IdentityReport verify_identity(const GeneratorSet& G, int i, std::size_t grid = 1000, double tol = 1e-6,
                                      Orientation orient = Orientation::fhat_i_first, double h_tol = 1e-8) {
  auto t0 = std::chrono::steady_clock::now();
  const Chart& c = *G.chart;
  IdentityWords W = identity_words(i, G.ell.variant(), G.ell, orient);
  WordEvaluator rhs(G, W.rhs), half(G, W.h_half);
  const auto& f = G.get("f", 1);
  const auto& fi = G.get("f", -1);
  const auto& g = G.get("g", 1);
  auto n = static_cast<double>(W.n);
  auto fbar_pow = [&](Point p) {
    for (std::uint64_t r = 0; r < W.n / 2; ++r) p = c.canonical(f->apply(c.canonical(g->apply(p))));
    return p;
  };
  ChartFlowMap back(G.chart, FieldKind::translation, -n / 2.0 - 1.0);

  IdentityReport R;
  R.i = i;
  R.variant = G.ell.variant();
  R.orientation = to_string(orient);
  R.word_length = W.rhs.length();
  R.tol = tol;
  R.h_tol = h_tol;
  ChartFlowMap shift(G.chart, FieldKind::translation, n / 2.0);
  for (const Point& p : identity_grid(n, grid)) {
    Point lhs = fbar_pow(p);
    R.discrepancy = std::max(R.discrepancy, c.distance(lhs, rhs.apply(p)));
    R.signal = std::max(R.signal, c.distance(lhs, c.canonical(shift.apply(p))));
    Point direct = c.canonical(back.apply(fbar_pow(c.canonical(f->apply(p)))));
    R.h_half_discrepancy = std::max(R.h_half_discrepancy, c.distance(direct, half.apply(p)));
    ++R.samples;
  }
  (void)fi;
  R.pass = R.discrepancy < tol && R.h_half_discrepancy < h_tol;
  R.seconds = seconds_since(t0);
  return R;
}

// ---- supports ----

struct SupportClaim {
  std::string name;
  std::string support;
  std::size_t off_support = 0;
  std::size_t on_support = 0;
  double worst = 0.0;   // largest off-support displacement (relative level units)
  double signal = 0.0;  // largest on-support displacement
  double tol = 1e-10;
  bool pass = false;
};

// Closed intervals [lo, hi] of [-1, 2] in the chart order.
struct SupportSet {
  std::string text;
  std::vector<std::pair<Point, Point>> parts;
  bool contains(const Chart& c, const Point& p) const {
    for (const auto& [a, b] : parts)
      if (c.compare(a, p) <= 0 && c.compare(p, b) <= 0) return true;
    return false;
  }
};

// Sample points: thirds from ambient [-1, 2], levels [-2, 2], levels [-2n, 2n].
inline std::vector<Point> support_samples(const Chart& c, double n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double r = U(rng);
    switch (k % 3) {
      case 0: {
        double x = -1.0 + 3.0 * r;
        if (x > 0.5 && x < 1.0) pts.push_back(c.canonical(Point::near_one(1.0 - x)));
        else pts.push_back(c.canonical(Point::ambient(x)));
        break;
      }
      case 1:
        pts.push_back(Point::level(-2.0 + 4.0 * r));
        break;
      default:
        pts.push_back(Point::level(-2.0 * n + 4.0 * n * r));
    }
  }
  return pts;
}

inline SupportClaim check_support(const GeneratorSet& G, const std::string& name, const GroupWord& w,
                                  const SupportSet& S, const std::vector<Point>& pts, double tol) {
  const Chart& c = *G.chart;
  WordEvaluator ev(G, w);
  SupportClaim r;
  r.name = name;
  r.support = S.text;
  r.tol = tol;
  for (const Point& p : pts) {
    double d = displacement(c, p, ev.apply(p));
    if (S.contains(c, p)) {
      ++r.on_support;
      r.signal = std::max(r.signal, d);
    } else {
      ++r.off_support;
      r.worst = std::max(r.worst, d);
    }
  }
  r.pass = r.worst < tol;
  return r;
}

inline std::vector<SupportClaim> verify_supports(const GeneratorSet& G, int i, std::size_t samples = 10000,
                                                 double tol = 1e-10, std::uint64_t seed = default_seed,
                                                 Orientation orient = Orientation::fhat_i_first) {
  const Chart& c = *G.chart;
  IdentityWords W = identity_words(i, G.ell.variant(), G.ell, orient);
  auto n = static_cast<double>(W.n);
  auto L = [](double u) { return Point::level(u); };
  auto A = [](double x) { return Point::ambient(x); };
  SupportSet sa{"[0,x_-3/4] u [x_-1/2,x_0] u [x_1,1]", {{A(0.0), L(-0.75)}, {L(-0.5), L(0.0)}, {L(1.0), A(1.0)}}};
  SupportSet sb{"[-1,0] u [x_-1/2,x_0] u [1,2]", {{A(-1.0), A(0.0)}, {L(-0.5), L(0.0)}, {A(1.0), A(2.0)}}};
  SupportSet sc{"[x_-1/2,x_0]", {{L(-0.5), L(0.0)}}};
  SupportSet sh{"[x_-n/2,x_0]", {{L(-n / 2.0), L(0.0)}}};
  auto pts = support_samples(c, n, samples, seed);
  std::vector<SupportClaim> out;
  out.push_back(check_support(G, "a", W.a, sa, pts, tol));
  out.push_back(check_support(G, "b", W.b, sb, pts, tol));
  out.push_back(check_support(G, "c", W.c, sc, pts, tol));
  if (G.ell.variant() == Variant::sec3) {
    out.push_back(check_support(G, "d", W.d, sa, pts, tol));
    GroupWord dL = W.d.pow(static_cast<long long>(W.power));
    out.push_back(check_support(G, "d^L c d^-L", dL * W.c * dL.inverse(), sc, pts, tol));
  }
  out.push_back(check_support(G, "h_n/2", W.h_half, sh, pts, tol));
  return out;
}

// Leftmost level moved by more than tol, for each orientation of the sec3 word
// and for h_{n/2} = f^{-n/2} f^{-1} fbar^{n/2} f computed directly.
struct OrientationReport {
  int i = 0;
  double direct_left = 0.0;
  double fhat_i_first_left = 0.0;
  double fhat_minus_i_first_left = 0.0;
  Orientation chosen = Orientation::fhat_i_first;
};

inline OrientationReport orientation_by_support(const GeneratorSet& G, int i, std::size_t samples = 4000,
                                                double tol = 1e-10) {
  const Chart& c = *G.chart;
  EllSequence ell(Variant::sec3);
  auto W1 = identity_words(i, Variant::sec3, ell, Orientation::fhat_i_first);
  auto W2 = identity_words(i, Variant::sec3, ell, Orientation::fhat_minus_i_first);
  WordEvaluator e1(G, W1.h_half), e2(G, W2.h_half);
  auto n = static_cast<double>(W1.n);
  const auto& f = G.get("f", 1);
  const auto& g = G.get("g", 1);
  ChartFlowMap back(G.chart, FieldKind::translation, -n / 2.0 - 1.0);
  auto direct = [&](Point p) {
    p = c.canonical(f->apply(p));
    for (std::uint64_t r = 0; r < W1.n / 2; ++r) p = c.canonical(f->apply(c.canonical(g->apply(p))));
    return c.canonical(back.apply(p));
  };
  OrientationReport R;
  R.i = i;
  R.direct_left = R.fhat_i_first_left = R.fhat_minus_i_first_left = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    double u = -n + (n + 1.0) * (static_cast<double>(k) + 0.5) / static_cast<double>(samples);
    Point p = Point::level(u);
    if (displacement(c, p, direct(p)) > tol) R.direct_left = std::min(R.direct_left, u);
    if (displacement(c, p, e1.apply(p)) > tol) R.fhat_i_first_left = std::min(R.fhat_i_first_left, u);
    if (displacement(c, p, e2.apply(p)) > tol) R.fhat_minus_i_first_left = std::min(R.fhat_minus_i_first_left, u);
  }
  auto gap = [&](double x) { return std::isfinite(x) ? std::fabs(x - R.direct_left) : std::numeric_limits<double>::infinity(); };
  R.chosen = gap(R.fhat_i_first_left) <= gap(R.fhat_minus_i_first_left) ? Orientation::fhat_i_first
                                                                        : Orientation::fhat_minus_i_first;
  return R;
}

// ---- commutator time law ----

struct TimeLawCheck {
  std::size_t pairs = 0;
  double worst_cell = 0.0;   // on the unit cell, level units
  double worst_chart = 0.0;  // chart flows, relative level units
  double min_signal = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::uint64_t, double>> ell_rows;  // (l, |[Y^t, Yhat^s] - Y^{1/l}|)
  double tol = 1e-10;
  bool pass = false;
};

inline TimeLawCheck time_law_check(const CellChartPtr& cc, std::size_t pairs = 100, std::uint64_t seed = default_seed,
                                   double tol = 1e-10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ChartPtr c(cc, &cc->chart());
  std::vector<double> offs, levels;
  for (int k = 1; k < 64; ++k) offs.push_back(k / 64.0);
  for (int k = -40; k <= 40; ++k) levels.push_back(k * 0.37 + 0.05);
  TimeLawCheck r;
  r.tol = tol;
  for (std::size_t k = 0; k < pairs; ++k) {
    double s = U(rng), t = U(rng);
    auto a = commutator_time_law(cc, s, t, offs);
    auto b = commutator_time_law_chart(c, s, t, levels);
    r.worst_cell = std::max({r.worst_cell, a.commutator, a.conjugation});
    r.worst_chart = std::max({r.worst_chart, b.commutator, b.conjugation});
    r.min_signal = std::min(r.min_signal, b.signal);
    ++r.pairs;
  }
  for (std::uint64_t l : {4u, 16u, 64u}) {
    double rt = std::sqrt(static_cast<double>(l));
    double t = 1.0 / rt, s = std::log1p(-1.0 / rt) / ln2;
    CellMap Yt(cc, FieldKind::translation, t), Ymt(cc, FieldKind::translation, -t);
    CellMap Ys(cc, FieldKind::dilation, s), Yms(cc, FieldKind::dilation, -s);
    CellMap Yl(cc, FieldKind::translation, 1.0 / static_cast<double>(l));
    double e = 0.0;
    for (double v : offs) e = std::max(e, std::fabs(Yt.apply(Ys.apply(Ymt.apply(Yms.apply(v)))) - Yl.apply(v)));
    ChartFlowMap Ct(c, FieldKind::translation, t), Cmt(c, FieldKind::translation, -t);
    ChartFlowMap Cs(c, FieldKind::dilation, s), Cms(c, FieldKind::dilation, -s);
    ChartFlowMap Cl(c, FieldKind::translation, 1.0 / static_cast<double>(l));
    for (double u : levels) {
      Point p = Point::level(u);
      Point q = Ct.apply(Cs.apply(Cmt.apply(Cms.apply(p))));
      e = std::max(e, c->distance(c->canonical(q), c->canonical(Cl.apply(p))) / std::max(1.0, std::fabs(u)));
    }
    r.ell_rows.emplace_back(l, e);
  }
  r.pass = r.worst_cell < tol && r.worst_chart < tol;
  for (const auto& [l, e] : r.ell_rows) r.pass = r.pass && e < tol;
  return r;
}

// ---- the growth bound for flows ----

struct TsuboiRow {
  double t = 0.0;
  double lhs = 0.0;    // grid sup |D log D flow_t|
  double bound = 0.0;  // (C2/C1)(e^{C1 t} - 1)
  double slack = 0.0;  // 1 - lhs / (bound (1 + rel_slack))
};

struct TsuboiReport {
  std::string field;
  double C1 = 0.0;
  double C2 = 0.0;
  std::vector<TsuboiRow> rows;
  double min_slack = 0.0;
  double quadrature_error = 0.0;  // closed-form against integrated log-derivative
  bool pass = false;
};

inline std::string field_label(const FlowField& F) {
  std::string k = F.kind == FieldKind::translation ? "translation" : "dilation";
  switch (F.conj) {
    case Conjugation::none: return k + "/line";
    case Conjugation::chart: return k + "/chart";
    case Conjugation::fundamental: return k + "/I";
    default: return k + "/cell" + std::to_string(F.cell);
  }
}

inline TsuboiReport pixton_tsuboi_check(const CellChartPtr& cc, const FlowField& F, const std::vector<double>& times,
                                        std::size_t grid = 2048, double rel_slack = 1e-3) {
  if (F.conj != Conjugation::fundamental && F.conj != Conjugation::cell)
    throw std::invalid_argument("pixton_tsuboi_check: field must live on a single cell");
  auto k0 = static_cast<double>(F.support_cell());
  auto at = [&](double v) { return Point::level(k0 + v); };
  TsuboiReport R;
  R.field = field_label(F);
  R.C1 = grid_sup([&](double v) { return field_jet(*cc, F, at(v)).d1; }, 0.0, 1.0, grid).second;
  R.C2 = grid_sup([&](double v) { return field_jet(*cc, F, at(v)).d2; }, 0.0, 1.0, grid).second;
  if (!(R.C1 > 0.0)) throw std::domain_error("pixton_tsuboi_check: degenerate field (sup |D X| = 0)");
  R.min_slack = std::numeric_limits<double>::infinity();
  R.pass = true;
  for (double t : times) {
    TsuboiRow row;
    row.t = t;
    auto map = flow(cc, F, t);
    row.lhs = grid_sup([&](double v) { return map->jet(at(v)).A; }, 0.0, 1.0, grid).second;
    row.bound = R.C2 / R.C1 * std::expm1(R.C1 * std::fabs(t));
    if (row.bound == 0.0) {
      row.slack = row.lhs == 0.0 ? 0.0 : -1.0;
    } else {
      row.slack = 1.0 - row.lhs / (row.bound * (1.0 + rel_slack));
    }
    R.pass = R.pass && row.slack >= 0.0;
    if (t != 0.0) R.min_slack = std::min(R.min_slack, row.slack);
    for (int j = 1; j <= 7; ++j) {
      Point p = at(j / 8.0);
      R.quadrature_error = std::max(R.quadrature_error, std::fabs(flow_log_deriv_quadrature(cc, F, t, p) - map->jet(p).L));
    }
    R.rows.push_back(row);
  }
  if (!std::isfinite(R.min_slack)) R.min_slack = 0.0;
  return R;
}

// ---- gap lengths ----

struct GapRow {
  double n = 0.0;
  double gap = 0.0;
  double ratio = 0.0;  // |I_n| n ln n (ln ln n)^2
};

inline std::vector<GapRow> gap_asymptotics(const Chart& c, double n_lo, double n_hi, std::size_t count) {
  std::vector<GapRow> rows;
  for (std::size_t k = 0; k < count; ++k) {
    double n = std::round(n_lo * std::pow(n_hi / n_lo, static_cast<double>(k) / static_cast<double>(count - 1)));
    wide g = c.gap_length(n);
    wide ln = std::log(static_cast<wide>(n)), lln = std::log(ln);
    rows.push_back({n, static_cast<double>(g), static_cast<double>(g * n * ln * lln * lln)});
  }
  return rows;
}

// ---- derivative estimates for f^n_* Z and f^n ----

struct EstimateRow {
  double n = 0.0;
  double d1 = 0.0;          // sup_{I_n} |D(f^n_* Z)|
  double d2_scaled = 0.0;   // sup_{I_n} |D^2(f^n_* Z)| / (n ln n (ln ln n)^2)
  double affine = 0.0;      // sup_{I_0} |A(f^n)|
  double schwarzian = 0.0;  // sup_{I_0} |S(f^n)|
};

struct EstimateReport {
  FieldKind kind = FieldKind::translation;
  std::vector<EstimateRow> rows;
  std::array<double, 4> slopes{};  // fitted d ln(column) / d ln n, upper half of ln n
  double d2_band = 0.0;            // max / min of the scaled second derivative
  double d2_tail_band = 0.0;       // same, upper half only
  bool pass = false;
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> v;
  for (std::size_t k = 0; k < count; ++k)
    v.push_back(std::round(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1))));
  return v;
}

// Bounded: log-log slope over the upper half of ln n below growth_tol.
inline EstimateReport derivative_estimates(const CellChartPtr& cc, FieldKind kind, const std::vector<double>& ns,
                                           std::size_t grid = 1024, double growth_tol = 0.05, double band = 4.0) {
  ChartPtr c(cc, &cc->chart());
  EstimateReport R;
  R.kind = kind;
  for (double n : ns) {
    EstimateRow row;
    row.n = n;
    FlowField F{kind, Conjugation::cell, static_cast<long long>(n)};
    auto at = [&](double v) { return Point::level(n + v); };
    row.d1 = grid_sup([&](double v) { return field_jet(*cc, F, at(v)).d1; }, 0.0, 1.0, grid).second;
    double ln = std::log(n), lln = std::log(ln);
    row.d2_scaled = grid_sup([&](double v) { return field_jet(*cc, F, at(v)).d2; }, 0.0, 1.0, grid).second /
                    (n * ln * lln * lln);
    ChartFlowMap fn(c, FieldKind::translation, n);
    row.affine = grid_sup([&](double v) { return fn.jet(Point::level(v)).A; }, 0.0, 1.0, grid).second;
    row.schwarzian = grid_sup([&](double v) { return fn.jet(Point::level(v)).S; }, 0.0, 1.0, grid).second;
    R.rows.push_back(row);
  }
  std::vector<double> x;
  std::array<std::vector<double>, 4> y;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  double tlo = lo, thi = 0.0;
  double mid = R.rows.empty() ? 0.0 : 0.5 * (std::log(R.rows.front().n) + std::log(R.rows.back().n));
  for (const auto& r : R.rows) {
    lo = std::min(lo, r.d2_scaled);
    hi = std::max(hi, r.d2_scaled);
    if (std::log(r.n) < mid) continue;
    tlo = std::min(tlo, r.d2_scaled);
    thi = std::max(thi, r.d2_scaled);
    x.push_back(std::log(r.n));
    y[0].push_back(std::log(r.d1));
    y[1].push_back(std::log(r.d2_scaled));
    y[2].push_back(std::log(r.affine));
    y[3].push_back(std::log(r.schwarzian));
  }
  for (int k = 0; k < 4; ++k) R.slopes[k] = fit_slope(x, y[k]);
  R.d2_band = hi / lo;
  R.d2_tail_band = thi / tlo;
  R.pass = R.slopes[0] < growth_tol && R.slopes[2] < growth_tol && R.slopes[3] < growth_tol && R.d2_band <= band;
  return R;
}

// ---- Hoelder quotients of the pasted maps ----

// Affine derivative D log Dh (ambient) of a pasted map at the level n + v, with
// cell index n held apart from the offset v so that n may exceed 2^53:
//   A_h = Phi'(p) (A_G(v) + a(p) - a(q) DG(v)),  a = A_Phi / Phi',
//   A_G(v) = int_0^t V''(G_s v) DG_s(v) ds  (V the level field of the cell).
class PastedCellAffine {
 public:
  PastedCellAffine(CellChartPtr cc, FieldKind kind) : cc_(std::move(cc)), kind_(kind) {}

  struct Value {
    double log_scale = 0.0;  // log Phi'(p)
    double inner = 0.0;      // A_G + a(p) - a(q) DG
    double log_deriv = 0.0;  // log Dh, ambient
  };

  Value at(double n, double t, double v) const {
    const Chart& c = cc_->chart();
    Value r;
    if (t == 0.0 || v <= 0.0 || v >= 1.0) {
      r.log_scale = c.jet_level(n + v).L;
      return r;
    }
    CellMap G(cc_, kind_, t);
    double gv = G.apply(v);
    Jet gj = G.jet(v);
    double AG = 0.0;
    const auto& rule = GaussLegendre<16>::instance();
    AG = rule.integrate(
        [&](double s) {
          CellMap Gs(cc_, kind_, s);
          double w = Gs.apply(v);
          return CellMap::level_field(*cc_, kind_, w).d2 * std::exp(Gs.jet(v).L);
        },
        0.0, t);
    ChartJet jp = c.jet_level(n + v), jq = c.jet_level(n + gv);
    double ap = jp.A * std::exp(-jp.L), aq = jq.A * std::exp(-jq.L);
    r.log_scale = jp.L;
    r.inner = AG + ap - aq * std::exp(gj.L);
    r.log_deriv = gj.L + jp.L - jq.L;
    return r;
  }

 private:
  CellChartPtr cc_;
  FieldKind kind_;
};

struct HolderRow {
  double n = 0.0;
  double t = 0.0;
  double sup_inner = 0.0;  // sup_v |A_h| / Phi'(x_n)
  double log_A = 0.0;      // ln sup |A_h|
  double log_gap = 0.0;    // ln |I_n|
  double log_Q = 0.0;      // ln Q_n(alpha)
};

struct HolderReport {
  double alpha = 0.0;
  Variant variant = Variant::sec2;
  std::string pasted = "h";
  double n_min = 0.0, n_max = 0.0;
  std::vector<HolderRow> rows;
  double slope = 0.0;      // ln Q_n against ln n, upper half of the range
  double expected = 0.0;   // alpha - 1/2 (sec2) or alpha - 1 (sec3)
  bool bounded = false;    // slope < 0
  double cross_cell_ratio = 0.0;  // worst cross-cell quotient / max Q_n
  double check_error = 0.0;       // analytic against direct jets and central differences, relative to the cell sup
};

// Active cells sampled per even block i: n = 2^{i-1} (1 + k/per_block).
inline std::vector<double> holder_cells(int i_lo, int i_hi, int block_step, int per_block) {
  std::vector<double> ns;
  for (int i = i_lo; i <= i_hi; i += block_step) {
    if (i % 2) continue;
    for (int k = 0; k < per_block; ++k)
      ns.push_back(std::ldexp(1.0 + static_cast<double>(k) / per_block, i - 1));
  }
  return ns;
}

namespace detail {

// Hoelder quotient |L(y) - L(x)| / |y - x|^alpha across pairs of cells below 2^40.
inline double cross_cell_worst(const CellChartPtr& cc, const CellwiseFlow& h, double alpha,
                               const std::vector<double>& ns, std::uint64_t seed) {
  const Chart& c = cc->chart();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> small;
  for (double n : ns)
    if (n < 1099511627776.0) small.push_back(n);
  double worst = 0.0;
  auto quotient = [&](double u1, double u2) {
    Point p = Point::level(u1), q = Point::level(u2);
    double dl = std::fabs(h.jet(q).L - h.jet(p).L);
    wide d = std::fabs(static_cast<wide>(c.complement(p)) - static_cast<wide>(c.complement(q)));
    if (d <= 0) return 0.0;
    return static_cast<double>(dl / std::pow(d, static_cast<wide>(alpha)));
  };
  for (std::size_t a = 0; a + 1 < small.size(); ++a) {
    for (int r = 0; r < 16; ++r) {
      double m = small[a], n = small[a + 1 + (r % std::min<std::size_t>(3, small.size() - a - 1))];
      worst = std::max(worst, quotient(m + U(rng), n + U(rng)));
      worst = std::max(worst, quotient(m + 1.0 + U(rng), m + 1.0 + 1.0 + U(rng)));
      worst = std::max(worst, quotient(m + 1.0 - 0.25 * U(rng), m + 1.0 + 0.25 * U(rng)));
    }
  }
  return worst;
}

}  // namespace detail

inline HolderReport holder_sweep(const GeneratorSet& G, double alpha, const std::vector<double>& ns,
                                 std::size_t grid = 48, std::uint64_t seed = default_seed) {
  if (ns.size() < 4) throw std::invalid_argument("holder_sweep: need at least four cells");
  HolderReport R;
  R.alpha = alpha;
  R.variant = G.ell.variant();
  R.expected = alpha - (R.variant == Variant::sec2 ? 0.5 : 1.0);
  R.n_min = ns.front();
  R.n_max = ns.back();
  TimeSequences ts(G.ell);
  const Chart& c = *G.chart;
  PastedCellAffine aff(G.cells, FieldKind::translation);
  auto h = std::dynamic_pointer_cast<const CellwiseFlow>(G.get("h", 1));
  double maxQ = -std::numeric_limits<double>::infinity();
  for (double n : ns) {
    double t = ts.t(n);
    if (t == 0.0) continue;
    HolderRow row;
    row.n = n;
    row.t = t;
    auto [v, s] = grid_sup([&](double v) { return aff.at(n, t, v).inner; }, 0.0, 1.0, grid);
    row.sup_inner = s;
    row.log_A = std::log(s) + aff.at(n, t, v).log_scale;
    row.log_gap = static_cast<double>(std::log(c.gap_length(n)));
    row.log_Q = row.log_A + (1.0 - alpha) * row.log_gap;
    maxQ = std::max(maxQ, row.log_Q);
    // Direct jets and level central differences where the cell is resolvable.
    if (n < 1048576.0) {
      double scale = 0.0, err = 0.0;
      for (int k = 1; k <= 10; ++k) {
        double vv = k / 11.0;
        auto val = aff.at(n, t, vv);
        double A = std::exp(val.log_scale) * val.inner;
        double direct = h->jet(Point::level(n + vv)).A;
        double hstep = 1e-4;
        double fd = (aff.at(n, t, vv + hstep).log_deriv - aff.at(n, t, vv - hstep).log_deriv) / (2 * hstep) *
                    std::exp(val.log_scale);
        scale = std::max(scale, std::fabs(direct));
        err = std::max({err, std::fabs(A - direct), std::fabs(fd - direct)});
      }
      if (scale > 0.0) R.check_error = std::max(R.check_error, err / scale);
    }
    R.rows.push_back(row);
  }
  if (R.rows.size() < 4) throw std::invalid_argument("holder_sweep: fewer than four active cells");
  double mid = 0.5 * (std::log(R.rows.front().n) + std::log(R.rows.back().n));
  std::vector<double> x, y;
  for (const auto& r : R.rows)
    if (std::log(r.n) >= mid) {
      x.push_back(std::log(r.n));
      y.push_back(r.log_Q);
    }
  R.slope = fit_slope(x, y);
  R.bounded = R.slope < 0.0;
  R.cross_cell_ratio = detail::cross_cell_worst(G.cells, *h, alpha, ns, seed) / std::exp(maxQ);
  return R;
}

// sup over I_n of |log Dh| for the active cells, with its per-cell trend.
struct C1Row {
  double n = 0.0;
  double sup_log_deriv = 0.0;
};

inline std::vector<C1Row> c1_pasting_echo(const GeneratorSet& G, const std::vector<double>& ns, std::size_t grid = 256) {
  TimeSequences ts(G.ell);
  PastedCellAffine aff(G.cells, FieldKind::translation);
  std::vector<C1Row> rows;
  for (double n : ns) {
    double t = ts.t(n);
    if (t == 0.0) continue;
    rows.push_back({n, grid_sup([&](double v) { return aff.at(n, t, v).log_deriv; }, 0.0, 1.0, grid).second});
  }
  return rows;
}

// ---- the undistortion witness ----

struct WitnessRow {
  int k = 0;
  double y = 0.0;          // level of y_k
  double value = 0.0;      // D(f^k g f^-k)(y_k)
  double endpoint = 0.0;   // max |D(f^k g f^-k) - 1| at x_k, x_{k+1}
};

struct WitnessReport {
  double V = 0.0;
  int N = 0;
  double lambda = 0.0;
  double sup_log_DgN = 0.0;
  std::vector<WitnessRow> rows;
  std::vector<std::pair<int, double>> variation;  // (n, var log D fbar^n)
  double variation_slope = 0.0;
  bool pass = false;
  std::string failure;
};

class WitnessNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline WitnessReport undistortion_witness(const GeneratorSet& G, int k_max = 30, int N_search = 20,
                                          std::size_t grid = 4096) {
  const Chart& c = *G.chart;
  const auto& cc = G.cells;
  const auto& f = G.get("f", 1);
  const auto& g = G.get("g", 1);
  WitnessReport R;

  auto outer = sinh_level_grid(c, 40001, -c.overflow_level(), c.overflow_level());
  std::vector<Point> vgrid{Point::ambient(0.0)};
  vgrid.insert(vgrid.end(), outer.begin(), outer.end());
  vgrid.push_back(Point::ambient(1.0));
  R.V = variation_log_deriv(*f, vgrid).total_variation;

  for (int N = 1; N <= N_search; ++N) {
    auto gN = flow(cc, FlowField{FieldKind::translation, Conjugation::fundamental, 0}, N);
    double s = grid_sup([&](double v) { return gN->jet(Point::level(v)).L; }, 0.0, 1.0, grid).second;
    if (s > 2.0 * R.V) {
      R.N = N;
      R.sup_log_DgN = s;
      break;
    }
  }
  if (R.N == 0) throw WitnessNotFound("no N <= " + std::to_string(N_search) + " with sup Dg^N > e^{2V}");
  R.lambda = std::exp(R.V / R.N);
  double log_lambda = R.V / R.N;

  R.pass = true;
  std::vector<double> ys;
  for (int k = 1; k <= k_max; ++k) {
    auto m = flow(cc, FlowField{FieldKind::translation, Conjugation::cell, k}, 1.0);
    auto [v, s] = grid_sup([&](double v) { return std::max(0.0, m->jet(Point::level(k + v)).L); }, 0.0, 1.0, grid);
    WitnessRow row;
    row.k = k;
    row.y = k + v;
    row.value = std::exp(m->jet(Point::level(row.y)).L);
    row.endpoint = std::max(std::fabs(std::expm1(m->jet(Point::level(k)).L)),
                            std::fabs(std::expm1(m->jet(Point::level(k + 1.0)).L)));
    R.pass = R.pass && row.value >= R.lambda && row.endpoint <= 1e-8;
    ys.push_back(row.y);
    R.rows.push_back(row);
  }

  std::vector<double> xs, vs;
  auto coarse = sinh_level_grid(c, 4001, -c.overflow_level(), c.overflow_level());
  for (int n = 1; n <= k_max; ++n) {
    std::vector<double> lv;
    for (const Point& p : coarse)
      if (p.u() < -1.0 || p.u() > n + 2.0) lv.push_back(p.u());
    for (int k = -1; k <= n + 1; ++k)
      for (int j = 0; j < 256; ++j) lv.push_back(k + j / 256.0);
    for (int k = 0; k < n && k < static_cast<int>(ys.size()); ++k) lv.push_back(ys[k]);
    std::sort(lv.begin(), lv.end());
    double prev = 0.0, var = 0.0;
    for (std::size_t a = 0; a < lv.size(); ++a) {
      Point p = Point::level(lv[a]);
      double L = 0.0;
      for (int r = 0; r < n; ++r) {
        L += g->jet(p).L;
        p = c.canonical(g->apply(p));
        L += f->jet(p).L;
        p = c.canonical(f->apply(p));
      }
      if (a) var += std::fabs(L - prev);
      prev = L;
    }
    R.variation.emplace_back(n, var);
    xs.push_back(n);
    vs.push_back(var);
    if (var < 0.95 * n * log_lambda) R.pass = false;
  }
  R.variation_slope = fit_slope(xs, vs);
  if (R.variation_slope < 0.95 * log_lambda) R.pass = false;
  if (!R.pass) R.failure = "witness bound violated";
  return R;
}

}  // namespace dlab
