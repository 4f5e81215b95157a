#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "chart.hpp"

namespace dlab {

// L = log Df, A = D log Df, S = Schwarzian, all in ambient coordinates.
struct Jet {
  double L = 0.0;
  double A = 0.0;
  double S = 0.0;
};

struct Interval {
  double lo = -1.0;
  double hi = 2.0;
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

class Diffeo;
using DiffeoPtr = std::shared_ptr<const Diffeo>;
using ChartPtr = std::shared_ptr<const Chart>;

class Diffeo : public std::enable_shared_from_this<Diffeo> {
 public:
  explicit Diffeo(ChartPtr chart) : chart_(std::move(chart)) {}
  virtual ~Diffeo() = default;

  virtual std::string name() const = 0;
  virtual Point apply(const Point& p) const = 0;
  // Jet at p (of the map, not of its image).
  virtual Jet jet(const Point& p) const = 0;
  virtual DiffeoPtr inverse() const;
  virtual bool has_schwarzian() const { return true; }
  virtual Interval domain() const { return {}; }

  const Chart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }

  Point eval(const Point& p) const { return apply(p); }
  double eval_level(double u) const {
    Point q = chart_->canonical(apply(Point::level(u)));
    if (!q.is_level()) throw std::overflow_error(name() + ": image level not representable");
    return q.u();
  }
  double log_deriv(const Point& p) const { return jet(p).L; }
  double affine_deriv(const Point& p) const { return jet(p).A; }
  std::optional<double> schwarzian(const Point& p) const {
    if (!has_schwarzian()) return std::nullopt;
    return jet(p).S;
  }

 protected:
  ChartPtr chart_;
};

// ---- jet algebra ----

// Jet of f o g at p, given the jet of g at p and of f at g(p).
inline Jet chain(const Jet& f_at_gp, const Jet& g_at_p) {
  double dg = std::exp(g_at_p.L);
  Jet j;
  j.L = g_at_p.L + f_at_gp.L;
  j.A = g_at_p.A + f_at_gp.A * dg;
  j.S = g_at_p.S + f_at_gp.S * dg * dg;
  return j;
}

// Jet of f^{-1} at f(p) from the jet of f at p.
inline Jet invert_jet(const Jet& f_at_p) {
  double d = std::exp(-f_at_p.L);
  return {-f_at_p.L, -f_at_p.A * d, -f_at_p.S * d * d};
}

// Ambient jet of Phi^{-1} o m o Phi at p, where m is a map of levels with jet
// (Lm, Am, Sm) at Phi(p) and q is the image point.
inline Jet level_map_jet(const Chart& c, const Point& p, const Point& q, double Lm, double Am, double Sm) {
  ChartJet jp = c.jet(p), jq = c.jet(q);
  double cp = std::exp(jp.L);
  Jet j;
  j.L = jp.L + Lm - jq.L;
  double df = std::exp(j.L);
  j.A = jp.A + Am * cp - jq.A * df;
  j.S = jp.S + Sm * cp * cp - jq.S * df * df;
  return j;
}

// Jet of Phi o F o Phi^{-1} at the level of p, from the ambient jet of F at p.
inline Jet to_level_jet(const Chart& c, const Point& p, const Point& q, const Jet& amb) {
  ChartJet jp = c.jet(p), jq = c.jet(q);
  double ip = std::exp(-jp.L);
  double df = std::exp(amb.L);
  Jet j;
  j.L = amb.L + jq.L - jp.L;
  j.A = (amb.A + jq.A * df - jp.A) * ip;
  j.S = (amb.S + jq.S * df * df - jp.S) * ip * ip;
  return j;
}

// ---- combinators ----

class IdentityMap final : public Diffeo {
 public:
  explicit IdentityMap(ChartPtr c, Interval dom = {}) : Diffeo(std::move(c)), dom_(dom) {}
  std::string name() const override { return "id"; }
  Point apply(const Point& p) const override { return p; }
  Jet jet(const Point&) const override { return {}; }
  DiffeoPtr inverse() const override { return shared_from_this(); }
  Interval domain() const override { return dom_; }

 private:
  Interval dom_;
};

// factors[0] o factors[1] o ... ; the last factor acts first.
class Composite final : public Diffeo {
 public:
  Composite(ChartPtr c, std::vector<DiffeoPtr> factors) : Diffeo(std::move(c)), factors_(std::move(factors)) {
    for (std::size_t k = 0; k + 1 < factors_.size(); ++k)
      if (!factors_[k]->domain().contains(factors_[k + 1]->domain()))
        throw std::invalid_argument("compose: domain mismatch between " + factors_[k]->name() + " and " +
                                    factors_[k + 1]->name());
  }

  std::string name() const override {
    std::string s;
    for (const auto& f : factors_) s += (s.empty() ? "" : " o ") + f->name();
    return s.empty() ? "id" : s;
  }

  Point apply(const Point& p) const override {
    Point q = p;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) q = (*it)->apply(q);
    return q;
  }

  Jet jet(const Point& p) const override {
    Point q = p;
    Jet acc;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
      acc = chain((*it)->jet(q), acc);
      q = (*it)->apply(q);
    }
    return acc;
  }

  DiffeoPtr inverse() const override {
    std::vector<DiffeoPtr> inv;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) inv.push_back((*it)->inverse());
    return std::make_shared<Composite>(chart_, std::move(inv));
  }

  bool has_schwarzian() const override {
    return std::all_of(factors_.begin(), factors_.end(), [](const auto& f) { return f->has_schwarzian(); });
  }

  Interval domain() const override { return factors_.empty() ? Interval{} : factors_.back()->domain(); }

  const std::vector<DiffeoPtr>& factors() const { return factors_; }

 private:
  std::vector<DiffeoPtr> factors_;
};

namespace detail {
// Doubles as ordered 64-bit integers, so bisection halves the count of representable values.
inline std::int64_t ordered_bits(double x) {
  auto k = std::bit_cast<std::int64_t>(x);
  return k < 0 ? std::numeric_limits<std::int64_t>::min() - k : k;
}
inline double from_ordered_bits(std::int64_t k) {
  if (k < 0) k = std::numeric_limits<std::int64_t>::min() - k;
  return std::bit_cast<double>(k);
}
inline double ordered_mid(double a, double b) {
  std::int64_t ka = ordered_bits(a), kb = ordered_bits(b);
  std::int64_t m = ka / 2 + kb / 2 + ((ka % 2 + kb % 2) / 2);
  return from_ordered_bits(m);
}
}  // namespace detail

// Inverse by monotone bisection over the chart's order key: first locate the
// segment of [-1, 2], then bisect its coordinate down to adjacent doubles.
class NumericInverse final : public Diffeo {
 public:
  explicit NumericInverse(DiffeoPtr f) : Diffeo(f->chart_ptr()), f_(std::move(f)) {}

  std::string name() const override { return f_->name() + "^-1"; }

  Point apply(const Point& target) const override {
    const Chart& c = *chart_;
    auto segs = segments(c, f_->domain());
    // Segments are increasing and adjacent; find the one whose image brackets the target.
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const auto& [seg, a, b] = segs[k];
      if (c.compare(f_->apply(c.from_key({seg, b})), target) < 0) continue;
      if (c.compare(f_->apply(c.from_key({seg, a})), target) > 0) {
        if (k == 0) throw std::domain_error(name() + ": target below the image of the domain");
        // Target in the gap between two segments; both ends are adjacent points.
        const auto& [ps, pa, pb] = segs[k - 1];
        (void)pa;
        Point l = c.from_key({ps, pb}), r = c.from_key({seg, a});
        return c.distance(f_->apply(l), target) <= c.distance(f_->apply(r), target) ? c.canonical(l) : c.canonical(r);
      }
      return bisect(c, seg, a, b, target);
    }
    throw std::domain_error(name() + ": target above the image of the domain");
  }

  // The domain cut into order segments (segment, low coordinate, high coordinate).
  static std::vector<std::tuple<int, double, double>> segments(const Chart& c, Interval dom) {
    std::vector<std::tuple<int, double, double>> s;
    const double tiny = std::numeric_limits<double>::denorm_min();
    const double far = c.far_threshold();
    auto add = [&](int seg, double a, double b) {
      if (a <= b) s.emplace_back(seg, a, b);
    };
    add(0, dom.lo, std::min(dom.hi, 0.0));
    add(1, std::max(dom.lo, tiny), std::min(dom.hi, std::nextafter(far, 0.0)));
    double lo = std::max(dom.lo, far), hi = std::min(dom.hi, 1.0 - far);
    if (lo <= hi) add(2, lo == far ? -c.overflow_level() : c.phi(lo), hi == 1.0 - far ? c.overflow_level() : c.phi(hi));
    add(3, -std::nextafter(far, 0.0), -std::max(1.0 - dom.hi, tiny));
    add(4, std::max(dom.lo, 1.0), dom.hi);
    return s;
  }

 private:
  Point bisect(const Chart& c, int seg, double a, double b, const Point& target) const {
    for (int it = 0; it < 200; ++it) {
      double m = detail::ordered_mid(a, b);
      if (m == a || m == b) {
        Point pa = c.from_key({seg, a}), pb = c.from_key({seg, b});
        double da = c.distance(f_->apply(pa), target), db = c.distance(f_->apply(pb), target);
        return c.canonical(da <= db ? pa : pb);
      }
      int s = c.compare(f_->apply(c.from_key({seg, m})), target);
      if (s == 0) return c.canonical(c.from_key({seg, m}));
      if (s < 0)
        a = m;
      else
        b = m;
    }
    throw std::runtime_error(name() + ": bisection did not converge in 200 steps");
  }

 public:
  Jet jet(const Point& p) const override {
    Point q = apply(p);
    return invert_jet(f_->jet(q));
  }

  DiffeoPtr inverse() const override { return f_; }
  bool has_schwarzian() const override { return f_->has_schwarzian(); }
  Interval domain() const override { return f_->domain(); }

 private:
  DiffeoPtr f_;
};

inline DiffeoPtr Diffeo::inverse() const { return std::make_shared<NumericInverse>(shared_from_this()); }

inline DiffeoPtr compose(DiffeoPtr f, DiffeoPtr g) {
  ChartPtr c = f->chart_ptr();
  return std::make_shared<Composite>(c, std::vector<DiffeoPtr>{std::move(f), std::move(g)});
}

inline DiffeoPtr compose(ChartPtr c, std::vector<DiffeoPtr> factors) {
  return std::make_shared<Composite>(std::move(c), std::move(factors));
}

inline DiffeoPtr invert(const DiffeoPtr& f) { return f->inverse(); }

// ---- finite differences ----

struct FdDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

// Central differences of a real function; 5-point stencil for the third derivative.
inline FdDerivatives finite_differences(const std::function<double(double)>& F, double x, double h) {
  double f0 = F(x), fp = F(x + h), fm = F(x - h), fp2 = F(x + 2 * h), fm2 = F(x - 2 * h);
  FdDerivatives d;
  d.d1 = (fp - fm) / (2 * h);
  d.d2 = (fp - 2 * f0 + fm) / (h * h);
  d.d3 = (fp2 - 2 * fp + 2 * fm - fm2) / (2 * h * h * h);
  return d;
}

inline double fd_step(double x) { return 1e-6 * std::max(1.0, std::fabs(x)); }

// The map in level coordinates, u -> Phi(F(Phi^{-1}(u))).
inline std::function<double(double)> level_function(const DiffeoPtr& f) {
  return [f](double u) { return f->eval_level(u); };
}

// Jet of F in level coordinates at level u.
inline Jet level_jet(const Diffeo& f, double u) {
  Point p = Point::level(u);
  Point q = f.chart().canonical(f.apply(p));
  return to_level_jet(f.chart(), p, q, f.jet(p));
}

// L, A, S in level coordinates from finite differences of the level map.
inline Jet fd_level_jet(const DiffeoPtr& f, double u, double h = 0.0) {
  if (h <= 0.0) h = fd_step(u);
  auto d = finite_differences(level_function(f), u, h);
  Jet j;
  j.L = std::log(d.d1);
  j.A = d.d2 / d.d1;
  j.S = d.d3 / d.d1 - 1.5 * j.A * j.A;
  return j;
}

// The map in the centered ambient coordinate xi = x - 1/2, which keeps full
// precision near 1/2 where the cells live.
inline std::function<double(double)> centered_function(const DiffeoPtr& f) {
  return [f](double xi) {
    const Chart& c = f->chart();
    return c.centered(f->apply(c.from_centered(xi)));
  };
}

// Ambient L, A, S from finite differences at x = 1/2 + xi.
inline Jet fd_jet(const DiffeoPtr& f, double xi, double h = 0.0) {
  if (h <= 0.0) h = fd_step(0.5 + xi);
  auto d = finite_differences(centered_function(f), xi, h);
  Jet j;
  j.L = std::log(d.d1);
  j.A = d.d2 / d.d1;
  j.S = d.d3 / d.d1 - 1.5 * j.A * j.A;
  return j;
}

// ---- Schwarzian chain rule ----

struct SchwarzianCheck {
  double max_chain_residual = 0.0;  // composite S against the chain expansion
  double max_stencil_error = 0.0;   // composite S against the 5-point stencil
  std::size_t samples = 0;
};

// At each point, compares S(fg) with S(g) + S(f)(g) (Dg)^2, and with a 5-point
// stencil of the composite in the centered coordinate (step h). Errors are
// relative to max(1, |terms|).
inline SchwarzianCheck schwarzian_chain_check(const DiffeoPtr& f, const DiffeoPtr& g, const std::vector<Point>& points,
                                              double h = 1e-4) {
  if (!f->has_schwarzian() || !g->has_schwarzian())
    throw std::invalid_argument("schwarzian_chain_check: both maps must provide a Schwarzian");
  auto fg = compose(f, g);
  const Chart& c = f->chart();
  SchwarzianCheck r;
  for (const Point& p : points) {
    Jet jg = g->jet(p);
    Jet jf = f->jet(g->apply(p));
    Jet jc = fg->jet(p);
    double term = jf.S * std::exp(2 * jg.L);
    double scale = std::max({1.0, std::fabs(jg.S), std::fabs(term)});
    r.max_chain_residual = std::max(r.max_chain_residual, std::fabs(jc.S - (jg.S + term)) / scale);
    Jet fd = fd_jet(fg, c.centered(p), h);
    r.max_stencil_error = std::max(r.max_stencil_error, std::fabs(fd.S - jc.S) / std::max(1.0, std::fabs(jc.S)));
    ++r.samples;
  }
  return r;
}

// ---- variation ----

struct VariationReport {
  std::string map;
  Interval interval;
  std::size_t grid = 0;
  double total_variation = 0.0;
  std::vector<std::pair<long long, double>> per_domain;  // (cell index, variation)
  double asymptotic_slope = std::numeric_limits<double>::quiet_NaN();
};

// Sum of |L(p_{i+1}) - L(p_i)| along increasing points. Points carrying a level
// are grouped by cell floor(level) in the per-domain breakdown.
inline VariationReport variation_log_deriv(const Diffeo& f, const std::vector<Point>& points) {
  if (points.size() < 2) throw std::invalid_argument("variation_log_deriv: need at least two points");
  VariationReport r;
  r.map = f.name();
  r.grid = points.size();
  r.interval = {f.chart().ambient(points.front()), f.chart().ambient(points.back())};
  double prev = f.log_deriv(points.front());
  for (std::size_t k = 1; k < points.size(); ++k) {
    double cur = f.log_deriv(points[k]);
    double dv = std::fabs(cur - prev);
    r.total_variation += dv;
    const Point& p = points[k - 1];
    if (p.is_level() && std::fabs(p.u()) < 9e15) {
      long long cell = static_cast<long long>(std::floor(p.u()));
      if (r.per_domain.empty() || r.per_domain.back().first != cell)
        r.per_domain.emplace_back(cell, dv);
      else
        r.per_domain.back().second += dv;
    }
    prev = cur;
  }
  return r;
}

// Uniform grid of the ambient interval [a, b] (points canonicalised).
inline std::vector<Point> ambient_grid(const Chart& c, double a, double b, std::size_t n) {
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double x = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    if (x > 0.0 && x < 1.0)
      pts.push_back(c.canonical(x > 0.5 ? Point::near_one(1.0 - x) : Point::ambient(x)));
    else
      pts.push_back(Point::ambient(x));
  }
  return pts;
}

inline VariationReport variation_log_deriv(const Diffeo& f, Interval iv, std::size_t grid) {
  if (grid < 2) throw std::invalid_argument("variation_log_deriv: grid must be at least 2");
  return variation_log_deriv(f, ambient_grid(f.chart(), iv.lo, iv.hi, grid));
}

}  // namespace dlab
