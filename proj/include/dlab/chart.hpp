#pragma once

#include <cmath>
#include <compare>
#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "numeric.hpp"
#include "smoothstep.hpp"

namespace dlab {

struct ChartConfig {
  double delta = 0.49;
  double overflow_level = 1e300;
  int grid_default = 4096;

  double blend_width() const { return 0.5 - delta; }

  void validate() const {
    if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("chart.delta must lie in (0, 1/2)");
    if (!(overflow_level >= std::exp(std::exp(1.0 / delta))))
      throw std::invalid_argument("chart.overflow_level must be at least exp(exp(1/delta))");
    if (!(overflow_level <= std::numeric_limits<double>::max()))
      throw std::invalid_argument("chart.overflow_level must be finite");
    if (grid_default < 2) throw std::invalid_argument("chart.grid_default must be at least 2");
  }
};

// A point of [-1, 2]. Interior points whose level fits under the overflow bound
// are kept as levels; everything else is ambient, with the complement 1 - x
// stored exactly when x is near 1.
class Point {
 public:
  static Point level(double u) {
    Point p;
    p.level_ = true;
    p.u_ = u;
    return p;
  }
  static Point ambient(double x) {
    Point p;
    p.x_ = x;
    return p;
  }
  static Point near_one(double w) {
    Point p;
    p.w_ = w;
    p.x_ = 1.0 - w;
    p.has_w_ = true;
    return p;
  }

  bool is_level() const { return level_; }
  double u() const { return u_; }
  double x() const { return x_; }
  bool has_complement() const { return has_w_; }
  double w() const { return has_w_ ? w_ : 1.0 - x_; }
  bool interior() const { return level_ || (x_ > 0.0 && x_ < 1.0 && (!has_w_ || w_ > 0.0)); }

 private:
  bool level_ = false;
  bool has_w_ = false;
  double u_ = 0.0;
  double x_ = 0.0;
  double w_ = 0.0;
};

// Log-derivative jet of a map at a point: L = log Df, A = D log Df,
// DA = derivative of A, S = DA - A^2/2.
struct ChartJet {
  double L = 0.0;
  double A = 0.0;
  double DA = 0.0;
  double S = 0.0;
};

// The chart from (0,1) onto the line of levels. Tails are -exp(exp(1/x)) and
// exp(exp(1/(1-x))); the middle [delta, 1-delta] blends them with the flat step.
class Chart {
 public:
  explicit Chart(ChartConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    width_ = 1.0 - 2.0 * cfg_.delta;
    tail_level_ = std::exp(std::exp(1.0 / cfg_.delta));
    far_ = 1.0 / std::log(std::log(cfg_.overflow_level));
    slope0_ = blend_value_and_slope(0.0).second;
  }

  const ChartConfig& config() const { return cfg_; }
  double overflow_level() const { return cfg_.overflow_level; }
  // |level| at which the tails take over.
  double tail_level() const { return tail_level_; }
  // Distance to 0 or 1 below which levels exceed the overflow bound.
  double far_threshold() const { return far_; }
  double half_width() const { return 0.5 * width_; }

  // ---- values ----

  double phi(double x) const {
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("phi: x outside (0,1)");
    if (x <= cfg_.delta) return left_value(x);
    if (x >= 1.0 - cfg_.delta) return right_value(1.0 - x);
    return blend_value(x - 0.5);
  }

  double phi(const Point& p) const {
    if (p.is_level()) return p.u();
    if (p.has_complement() && p.w() <= cfg_.delta) return right_value(p.w());
    return phi(p.x());
  }

  // Level at x = 1/2 + xi.
  double phi_centered(double xi) const {
    if (std::fabs(xi) < 0.5 * width_) return blend_value(xi);
    if (xi < 0.0) return left_value(0.5 + xi);
    return right_value(0.5 - xi);
  }

  // Level at x = 1 - w.
  double phi_near_one(double w) const {
    if (w <= cfg_.delta) return right_value(w);
    return phi_centered(0.5 - w);
  }

  Point phi_inv(double u) const {
    if (!std::isfinite(u)) throw std::domain_error("phi_inv: level not finite");
    if (u >= tail_level_) return Point::near_one(1.0 / std::log(std::log(u)));
    if (u <= -tail_level_) return Point::ambient(1.0 / std::log(std::log(-u)));
    double xi = phi_inv_centered(u);
    if (xi > 0.0) return Point::near_one(0.5 - xi);
    return Point::ambient(0.5 + xi);
  }

  // x - 1/2 for the point at level u.
  double phi_inv_centered(double u) const {
    if (u >= tail_level_) return 0.5 - 1.0 / std::log(std::log(u));
    if (u <= -tail_level_) return 1.0 / std::log(std::log(-u)) - 0.5;
    double h = 0.5 * width_;
    double lo = -h, hi = h;
    double xi = u / slope0_;
    xi = std::clamp(xi, lo, hi);
    for (int it = 0; it < 200; ++it) {
      auto [val, der] = blend_value_and_slope(xi);
      double r = val - u;
      if (r == 0.0) return xi;
      if (r > 0.0)
        hi = xi;
      else
        lo = xi;
      double next = xi - r / der;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - xi) <= 1e-19 + 2e-16 * std::fabs(xi)) return next;
      xi = next;
    }
    return xi;
  }

  // ---- log-derivative jets ----

  ChartJet jet_at(double x) const {
    if (x <= cfg_.delta) return left_jet(1.0 / x);
    if (x >= 1.0 - cfg_.delta) return right_jet(1.0 / (1.0 - x));
    return blend_jet(x - 0.5);
  }

  ChartJet jet_centered(double xi) const {
    if (std::fabs(xi) < 0.5 * width_) return blend_jet(xi);
    if (xi < 0.0) return left_jet(1.0 / (0.5 + xi));
    return right_jet(1.0 / (0.5 - xi));
  }

  ChartJet jet_near_one(double w) const {
    if (w <= cfg_.delta) return right_jet(1.0 / w);
    return jet_centered(0.5 - w);
  }

  ChartJet jet_level(double u) const {
    if (u >= tail_level_) return right_jet(std::log(std::log(u)));
    if (u <= -tail_level_) return left_jet(std::log(std::log(-u)));
    return blend_jet(phi_inv_centered(u));
  }

  // Jet at the level sign * exp(E); E may exceed the double range of levels.
  ChartJet jet_log_level(int sign, double E) const {
    return sign > 0 ? right_jet(std::log(E)) : left_jet(std::log(E));
  }

  ChartJet jet(const Point& p) const {
    if (p.is_level()) return jet_level(p.u());
    if (p.has_complement()) return jet_near_one(p.w());
    return jet_at(p.x());
  }

  double log_dphi(double x) const {
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("log_dphi: x outside (0,1)");
    return jet_at(x).L;
  }

  // |I_n| = x_{n+1} - x_n.
  wide gap_length(double n) const {
    if (!(n > std::exp(1.0))) throw std::domain_error("gap_length: ln ln n undefined");
    if (n >= tail_level_) {
      wide a = std::log(static_cast<wide>(n));
      wide step = std::log1p(1.0L / static_cast<wide>(n));
      wide la = std::log(a);
      wide d = std::log1p(step / a);
      return d / (la * (la + d));
    }
    double lo = phi_inv_centered(n);
    double hi = phi_inv_centered(n + 1.0);
    if (n + 1.0 >= tail_level_) {
      wide w1 = 1.0L / std::log(std::log(static_cast<wide>(n) + 1.0L));
      return (0.5L - static_cast<wide>(lo)) - w1;
    }
    return static_cast<wide>(hi) - static_cast<wide>(lo);
  }

  // ---- point plumbing ----

  Point canonical(const Point& p) const {
    if (p.is_level()) {
      if (std::fabs(p.u()) <= cfg_.overflow_level) return p;
      return phi_inv(p.u());
    }
    if (p.has_complement()) {
      double w = p.w();
      if (w > far_ && w < 1.0) return Point::level(phi_near_one(w));
      return p;
    }
    double x = p.x();
    if (x > far_ && x < 1.0 - far_) return Point::level(phi(x));
    return p;
  }

  // x - 1/2, accurate near the middle.
  double centered(const Point& p) const {
    if (p.is_level()) return phi_inv_centered(p.u());
    if (p.has_complement()) return 0.5 - p.w();
    return p.x() - 0.5;
  }

  double ambient(const Point& p) const {
    if (p.is_level()) return 0.5 + phi_inv_centered(p.u());
    return p.x();
  }

  // Complement 1 - x, accurate near 1.
  double complement(const Point& p) const {
    if (p.is_level()) {
      if (p.u() >= tail_level_) return 1.0 / std::log(std::log(p.u()));
      return 0.5 - phi_inv_centered(p.u());
    }
    return p.w();
  }

  Point from_centered(double xi) const {
    if (std::fabs(xi) < 0.5 * width_) return Point::level(blend_value(xi));
    if (xi < 0.0) return canonical(Point::ambient(0.5 + xi));
    return canonical(Point::near_one(0.5 - xi));
  }

  // ln|level| for interior points, including those past the overflow bound.
  std::optional<double> log_level(const Point& p) const {
    if (p.is_level()) {
      if (p.u() == 0.0) return std::nullopt;
      return std::log(std::fabs(p.u()));
    }
    if (!p.interior()) return std::nullopt;
    if (p.has_complement() || p.x() > 0.5) return std::exp(1.0 / complement(p));
    return std::exp(1.0 / p.x());
  }

  // +1 right of the middle, -1 left, 0 at x_0 or outside (0,1).
  int side(const Point& p) const {
    if (p.is_level()) return p.u() > 0.0 ? 1 : (p.u() < 0.0 ? -1 : 0);
    if (!p.interior()) return 0;
    double xi = centered(p);
    return xi > 0.0 ? 1 : (xi < 0.0 ? -1 : 0);
  }

  // Level difference when both are levels, ambient difference otherwise.
  double distance(const Point& a, const Point& b) const {
    if (a.is_level() && b.is_level()) return std::fabs(a.u() - b.u());
    if (a.is_level() != b.is_level()) {
      Point ca = canonical(a), cb = canonical(b);
      if (ca.is_level() && cb.is_level()) return std::fabs(ca.u() - cb.u());
    }
    if ((a.has_complement() || ambient(a) > 0.75) && (b.has_complement() || ambient(b) > 0.75))
      return std::fabs(complement(a) - complement(b));
    if (ambient(a) > 0.25 && ambient(a) < 0.75 && ambient(b) > 0.25 && ambient(b) < 0.75)
      return std::fabs(centered(a) - centered(b));
    return std::fabs(ambient(a) - ambient(b));
  }

  // Ambient displacement between two points, accurate near 1/2 and near 1.
  double ambient_distance(const Point& a, const Point& b) const {
    double xa = ambient(a), xb = ambient(b);
    if (xa > 0.75 && xb > 0.75 && xa < 1.0 && xb < 1.0) return std::fabs(complement(a) - complement(b));
    if (xa > 0.25 && xa < 0.75 && xb > 0.25 && xb < 0.75) return std::fabs(centered(a) - centered(b));
    return std::fabs(xa - xb);
  }

  // Total order on [-1, 2] in five segments: x <= 0, far left, levels, far right, x >= 1.
  // Each segment has a monotone coordinate carrying full precision.
  struct OrderKey {
    int segment;
    double coord;
    auto operator<=>(const OrderKey&) const = default;
  };

  OrderKey key(const Point& p) const {
    if (p.is_level()) {
      if (std::fabs(p.u()) <= cfg_.overflow_level) return {2, p.u()};
      Point q = phi_inv(p.u());
      return key(q);
    }
    if (p.has_complement()) {
      double w = p.w();
      if (w <= 0.0) return {4, 1.0 - w};
      if (w < far_) return {3, -w};
      return {2, phi_near_one(w)};
    }
    double x = p.x();
    if (x <= 0.0) return {0, x};
    if (x >= 1.0) return {4, x};
    if (x < far_) return {1, x};
    if (x > 1.0 - far_) return {3, -(1.0 - x)};
    return {2, phi(x)};
  }

  Point from_key(const OrderKey& k) const {
    switch (k.segment) {
      case 0:
      case 1:
      case 4:
        return Point::ambient(k.coord);
      case 2:
        return Point::level(k.coord);
      default:
        return Point::near_one(-k.coord);
    }
  }

  int compare(const Point& a, const Point& b) const {
    auto ka = key(a), kb = key(b);
    return ka < kb ? -1 : (kb < ka ? 1 : 0);
  }

  bool less(const Point& a, const Point& b) const { return compare(a, b) < 0; }


 private:
  double left_value(double x) const {
    double v = std::exp(std::exp(1.0 / x));
    if (!std::isfinite(v)) throw std::overflow_error("phi: level overflows near 0");
    return -v;
  }
  double right_value(double w) const {
    double v = std::exp(std::exp(1.0 / w));
    if (!std::isfinite(v)) throw std::overflow_error("phi: level overflows near 1");
    return v;
  }

  // Tail jets in terms of q = 1/x (left) or q = 1/(1-x) (right), E = e^q.
  static ChartJet right_jet(double q) {
    double E = std::exp(q);
    ChartJet j;
    j.L = E + q + 2.0 * std::log(q);
    j.A = (E + 1.0) * q * q + 2.0 * q;
    j.DA = E * q * q * q * q + 2.0 * E * q * q * q + 2.0 * q * q * q + 2.0 * q * q;
    j.S = j.DA - 0.5 * j.A * j.A;
    return j;
  }
  static ChartJet left_jet(double q) {
    ChartJet j = right_jet(q);
    j.A = -j.A;
    return j;
  }

  struct TailTerms {
    double value;  // |T|
    double d1, d2, d3;
  };
  // Derivatives of exp(exp(q)) as a function of x, q = 1/x or 1/(1-x).
  static TailTerms tail_terms(const ChartJet& j) {
    double d1 = std::exp(j.L);
    return {0.0, d1, d1 * j.A, d1 * (j.A * j.A + j.DA)};
  }

  std::pair<double, double> blend_value_and_slope(double xi) const {
    double x = 0.5 + xi, xc = 0.5 - xi;
    double qL = 1.0 / x, qR = 1.0 / xc;
    double EL = std::exp(qL), ER = std::exp(qR);
    double s = 0.5 + xi / width_, sc = 0.5 - xi / width_;
    StepJet b = step_jet(s, sc);
    double bc = step(sc, s);
    double TL = std::exp(EL), TR = std::exp(ER);
    double dTL = TL * EL * qL * qL;
    double dTR = TR * ER * qR * qR;
    double value = blend_value(xi);
    double slope = bc * dTL + b.value * dTR + b.d1 / width_ * (TR + TL);
    return {value, slope};
  }

  double blend_value(double xi) const {
    double x = 0.5 + xi, xc = 0.5 - xi;
    double qL = 1.0 / x, qR = 1.0 / xc;
    double EL = std::exp(qL), ER = std::exp(qR);
    // ER - EL = EL * expm1(qR - qL), qR - qL = 2 xi / (x (1-x))
    double dq = 2.0 * xi / (x * xc);
    double dE = EL * std::expm1(dq);
    double sum;  // TR + TL = exp(ER) - exp(EL)
    if (dE >= 0.0)
      sum = std::exp(EL) * std::expm1(dE);
    else
      sum = -std::exp(ER) * std::expm1(-dE);
    double diff = std::exp(ER) + std::exp(EL);
    return 0.5 * sum + step_centered_offset(xi / width_) * diff;
  }

  ChartJet blend_jet(double xi) const {
    double x = 0.5 + xi, xc = 0.5 - xi;
    ChartJet jl = left_jet(1.0 / x);
    ChartJet jr = right_jet(1.0 / xc);
    TailTerms tl = tail_terms(jl);
    TailTerms tr = tail_terms(jr);
    double D = std::exp(std::exp(1.0 / xc)) + std::exp(std::exp(1.0 / x));
    double D1 = tr.d1 - tl.d1, D2 = tr.d2 - tl.d2;
    double s = 0.5 + xi / width_, sc = 0.5 - xi / width_;
    StepJet b = step_jet(s, sc);
    double bc = step(sc, s);
    double b1 = b.d1 / width_, b2 = b.d2 / (width_ * width_), b3 = b.d3 / (width_ * width_ * width_);
    double p1 = bc * tl.d1 + b.value * tr.d1 + b1 * D;
    double p2 = bc * tl.d2 + b.value * tr.d2 + 2.0 * b1 * D1 + b2 * D;
    double p3 = bc * tl.d3 + b.value * tr.d3 + 3.0 * b1 * D2 + 3.0 * b2 * D1 + b3 * D;
    ChartJet j;
    j.L = std::log(p1);
    j.A = p2 / p1;
    j.DA = p3 / p1 - j.A * j.A;
    j.S = j.DA - 0.5 * j.A * j.A;
    return j;
  }

  ChartConfig cfg_;
  double width_ = 0.0;
  double tail_level_ = 0.0;
  double far_ = 0.0;
  double slope0_ = 1.0;
};

}  // namespace dlab
