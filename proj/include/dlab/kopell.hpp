#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "numeric.hpp"

// The Moebius counterexample on [0,1]: f(x) = 2x/(x+1), cells f^n([1/2, 2/3]),
// and the pasted map g = f^n g_n f^-n.
namespace dlab::kopell {

inline constexpr double x0 = 0.5;
inline constexpr double x1 = 2.0 / 3.0;
inline constexpr double a = 8.0 / 15.0;
inline constexpr double b = 17.0 / 30.0;
inline constexpr double bp = 3.0 / 5.0;
inline constexpr double bpp = 19.0 / 30.0;
inline constexpr double h = 1.0 / 30.0;  // b - a = b' - b

inline void check_power(long long n) {
  if (n > 1020 || n < -1020) throw std::overflow_error("mobius power |n| > 1020");
}

// f^n(x) = 2^n x / ((2^n - 1) x + 1)
inline double mobius_pow(long long n, double x) {
  check_power(n);
  double p = std::ldexp(1.0, static_cast<int>(n));
  return p * x / ((p - 1.0) * x + 1.0);
}

// Df^n(x) = 2^n / ((2^n - 1) x + 1)^2
inline double d_mobius_pow(long long n, double x) {
  check_power(n);
  double p = std::ldexp(1.0, static_cast<int>(n));
  double q = (p - 1.0) * x + 1.0;
  return p / (q * q);
}

// |f^n x - f^n y| in the factored form.
inline double mobius_gap(long long n, double x, double y) {
  check_power(n);
  double p = std::ldexp(1.0, static_cast<int>(n));
  return p * std::fabs(x - y) / (((p - 1.0) * x + 1.0) * ((p - 1.0) * y + 1.0));
}

// ---- the bump ----

// B(u) = int_0^u e^{-1/(s(1-s))} ds / Z, with its first two derivatives.
class Step {
 public:
  Step() { Z_ = 2.0 * raw(0.5); }

  static double kernel(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (s * (1.0 - s)));
  }

  double value(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    if (u <= 0.5) return raw(u) / Z_;
    return 1.0 - raw(1.0 - u) / Z_;
  }
  double d1(double u) const { return kernel(u) / Z_; }
  double d2(double u) const {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double w = u * (1.0 - u);
    return kernel(u) * (1.0 - 2.0 * u) / (w * w) / Z_;
  }
  // int_0^u B
  double integral(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 0.5 + (u - 1.0);
    double m = GaussLegendre64::instance().integrate([](double s) { return s * kernel(s); }, 0.0, u);
    return u * value(u) - m / Z_;
  }
  double Z() const { return Z_; }

 private:
  static double raw(double u) { return GaussLegendre64::instance().integrate(kernel, 0.0, u); }
  double Z_;
};

// varrho on [a, 2/3]: (1/2) B((s-a)/h) on [a,b], the mirror descent on [b,b'],
// and varrho(b' + d) = -varrho(b' - d) beyond b'.
class Bump {
 public:
  // Value and derivatives at s = b' + d, d in [-2h, 2h]; zero outside.
  struct Jet3 {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
  };

  Jet3 at_offset(double d) const {
    if (d > 0.0) {
      Jet3 m = at_offset(-d);
      return {-m.v, m.d1, -m.d2};
    }
    if (d < -2.0 * h) return {};
    if (d <= -h) {
      double u = (d + 2.0 * h) / h;
      return {0.5 * B_.value(u), 0.5 * B_.d1(u) / h, 0.5 * B_.d2(u) / (h * h)};
    }
    double u = -d / h;
    return {0.5 * B_.value(u), -0.5 * B_.d1(u) / h, 0.5 * B_.d2(u) / (h * h)};
  }

  Jet3 at(double s) const { return at_offset(s - bp); }
  double operator()(double s) const { return at(s).v; }

  // P(s) = int_a^s varrho, symmetric about b'.
  double primitive(double s) const {
    double d = s - bp;
    if (d > 0.0) d = -d;
    if (d <= -2.0 * h) return 0.0;
    if (d <= -h) return 0.5 * h * B_.integral((d + 2.0 * h) / h);
    return 0.5 * h * (2.0 * B_.integral(1.0) - B_.integral(-d / h));
  }

  // I = int_a^b varrho by adaptive quadrature.
  double I() const {
    if (!I_) I_ = integrate_adaptive([this](double s) { return (*this)(s); }, a, b, 1e-14, 15).first;
    return *I_;
  }

  // sup over [a, 2/3] of |D^k varrho|, k = 0, 1, 2.
  double sup_derivative(int k, std::size_t grid = 20000) const {
    double best = 0.0;
    for (std::size_t j = 0; j <= grid; ++j) {
      double s = a + (x1 - a) * static_cast<double>(j) / static_cast<double>(grid);
      Jet3 v = at(s);
      best = std::max(best, std::fabs(k == 0 ? v.v : (k == 1 ? v.d1 : v.d2)));
    }
    return best;
  }

  const Step& step() const { return B_; }

 private:
  Step B_;
  mutable std::optional<double> I_;
};

inline const Bump& bump() {
  static const Bump B;
  return B;
}

// rho_n = 1 + varrho/n on [a, 2/3], 1 on [1/2, a].
inline double rho_n(long long n, double s) { return 1.0 + bump()(s) / static_cast<double>(n); }

// g_n on [1/2, 2/3]: a + int_a^x rho_n = x + P(x)/n. The identity for n <= 0.
struct Gn {
  long long n = 1;
  double operator()(double y) const {
    if (n <= 0 || y <= a || y >= x1) return y;
    return y + bump().primitive(y) / static_cast<double>(n);
  }
  // D^k g_n, k = 1, 2, 3
  double derivative(int k, double y) const {
    if (n <= 0 || y <= a || y >= x1) return k == 1 ? 1.0 : 0.0;
    auto j = bump().at(y);
    auto nn = static_cast<double>(n);
    if (k == 1) return 1.0 + j.v / nn;
    if (k == 2) return j.d1 / nn;
    return j.d2 / nn;
  }
};

// ---- the pasted map ----

class PastedG {
 public:
  // Cell n and the pulled-back point y = f^-n(x) in [1/2, 2/3).
  static std::pair<long long, double> locate(double x) {
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("pasted g: x outside (0,1)");
    auto n = static_cast<long long>(std::floor(std::log2(x / (1.0 - x))));
    n = std::clamp<long long>(n, -1020, 1020);
    double y = mobius_pow(-n, x);
    while (y >= x1 && n < 1020) y = mobius_pow(-(++n), x);
    while (y < x0 && n > -1020) y = mobius_pow(-(--n), x);
    return {n, y};
  }

  double apply(double x) const {
    if (x <= 0.0 || x >= 1.0) return x;
    auto [n, y] = locate(x);
    return mobius_pow(n, Gn{n}(y));
  }

  // Dg at f^n(y): [((2^n-1)y+1)/((2^n-1)g_n(y)+1)]^2 Dg_n(y), with 2^-n kept apart so n may be large.
  static double derivative_cell(long long n, double y) {
    Gn g{n};
    double gy = g(y);
    double r;
    if (n >= 0) {
      double e = std::ldexp(1.0, static_cast<int>(-std::min<long long>(n, 2000)));
      r = (y + (1.0 - y) * e) / (gy + (1.0 - gy) * e);
    } else {
      double p = std::ldexp(1.0, static_cast<int>(n));
      r = ((p - 1.0) * y + 1.0) / ((p - 1.0) * gy + 1.0);
    }
    return r * r * g.derivative(1, y);
  }

  double derivative(double x) const {
    if (x <= 0.0 || x >= 1.0) return 1.0;
    auto [n, y] = locate(x);
    return derivative_cell(n, y);
  }

  // sup over the cell n of |log Dg|.
  static double sup_log_deriv(long long n, std::size_t grid = 2048) {
    double best = 0.0;
    for (std::size_t j = 1; j < grid; ++j) {
      double y = a + (x1 - a) * static_cast<double>(j) / static_cast<double>(grid);
      best = std::max(best, std::fabs(std::log(derivative_cell(n, y))));
    }
    return best;
  }
};

// ---- reports ----

struct GapRow {
  long long n = 0;
  double scaled = 0.0;  // 2^n |f^n b - f^n a|
  double identity_error = 0.0;  // factored form against direct subtraction
};

struct GapReport {
  std::vector<GapRow> rows;
  double C = 0.0;     // sup of the scaled gaps
  double band = 0.0;  // max / min of the scaled gaps
};

inline GapReport gap_bound_check(long long n_lo, long long n_hi) {
  GapReport R;
  double lo = std::numeric_limits<double>::infinity();
  for (long long n = n_lo; n <= n_hi; ++n) {
    GapRow r;
    r.n = n;
    double g = mobius_gap(n, b, a);
    r.scaled = std::ldexp(g, static_cast<int>(n));
    r.identity_error = std::fabs(g - std::fabs(mobius_pow(n, b) - mobius_pow(n, a)));
    R.C = std::max(R.C, r.scaled);
    lo = std::min(lo, r.scaled);
    R.rows.push_back(r);
  }
  R.band = R.C / lo;
  return R;
}

struct BlowupRow {
  long long n = 0;
  double alpha = 0.0;
  double jump = 0.0;        // |Dg(f^n b) - Dg(f^n a)|
  double Q = 0.0;           // jump / |f^n b - f^n a|^alpha
  double prediction = 0.0;  // (C'/C^alpha) 2^{n alpha} / n
  double ratio = 0.0;       // Q / prediction
};

struct BlowupReport {
  std::vector<BlowupRow> rows;
  double C = 0.0;        // sup 2^n |f^n b - f^n a|
  double C_prime = 0.0;  // inf n |Dg(f^n b) - Dg(f^n a)|
  double jump_band = 0.0;  // max / min of n |Dg(f^n b) - Dg(f^n a)|
  std::vector<std::pair<double, double>> rates;  // (alpha, fitted d ln(n Q) / dn)
  double endpoint_deviation = 0.0;  // max |Dg(f^n a) - 1|
};

inline BlowupReport holder_blowup(const std::vector<double>& alphas, long long n_lo, long long n_hi) {
  BlowupReport R;
  R.C = gap_bound_check(n_lo, n_hi).C;
  double hi = 0.0;
  R.C_prime = std::numeric_limits<double>::infinity();
  for (long long n = n_lo; n <= n_hi; ++n) {
    double j = std::fabs(PastedG::derivative_cell(n, b) - PastedG::derivative_cell(n, a));
    R.C_prime = std::min(R.C_prime, static_cast<double>(n) * j);
    hi = std::max(hi, static_cast<double>(n) * j);
    R.endpoint_deviation = std::max(R.endpoint_deviation, std::fabs(PastedG::derivative_cell(n, a) - 1.0));
  }
  R.jump_band = hi / R.C_prime;
  for (double al : alphas) {
    std::vector<double> xs, ys;
    for (long long n = n_lo; n <= n_hi; ++n) {
      BlowupRow r;
      r.n = n;
      r.alpha = al;
      r.jump = std::fabs(PastedG::derivative_cell(n, b) - PastedG::derivative_cell(n, a));
      r.Q = r.jump / std::pow(mobius_gap(n, b, a), al);
      r.prediction = R.C_prime / std::pow(R.C, al) * std::exp2(static_cast<double>(n) * al) / static_cast<double>(n);
      r.ratio = r.Q / r.prediction;
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(static_cast<double>(n) * r.Q));
      R.rows.push_back(r);
    }
    R.rates.emplace_back(al, fit_slope(xs.data(), ys.data(), xs.size()));
  }
  return R;
}

// sup |D^k g_n - D^k id| for k = 1, 2, 3, and n times it.
struct ConvergenceRow {
  long long n = 0;
  double sup[3] = {0.0, 0.0, 0.0};
  double scaled[3] = {0.0, 0.0, 0.0};
};

inline std::vector<ConvergenceRow> gn_convergence(const std::vector<long long>& ns, std::size_t grid = 20000) {
  std::vector<ConvergenceRow> rows;
  for (long long n : ns) {
    ConvergenceRow r;
    r.n = n;
    Gn g{n};
    for (std::size_t j = 0; j <= grid; ++j) {
      double y = a + (x1 - a) * static_cast<double>(j) / static_cast<double>(grid);
      for (int k = 1; k <= 3; ++k)
        r.sup[k - 1] = std::max(r.sup[k - 1], std::fabs(g.derivative(k, y) - (k == 1 ? 1.0 : 0.0)));
    }
    for (int k = 0; k < 3; ++k) r.scaled[k] = r.sup[k] * static_cast<double>(n);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dlab::kopell
