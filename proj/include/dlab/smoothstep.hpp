#pragma once

#include <algorithm>
#include <cmath>

#include "numeric.hpp"

namespace dlab {

// Flat step B(s) = e(s) / (e(s) + e(1-s)), e(s) = exp(-1/s).
// B = 0 for s <= 0, B = 1 for s >= 1, every derivative vanishes at both ends,
// and B(s) + B(1-s) = 1.
struct StepJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

namespace detail {
// Below this, exp(-1/s) is under the smallest normal double.
inline constexpr double step_flat = 1.0 / 720.0;

// g(s) = 1/s - 1/(1-s) = (1-2s) / (s(1-s)); B = 1 / (1 + exp(g)).
inline double step_exponent(double s, double one_minus_s) {
  return (one_minus_s - s) / (s * one_minus_s);
}
}  // namespace detail

// B(s) given both s and 1-s, so callers can pass a precise complement.
inline double step(double s, double one_minus_s) {
  if (s <= detail::step_flat) return s <= 0.0 ? 0.0 : std::exp(-1.0 / s) / (1.0 + std::exp(-1.0 / s));
  if (one_minus_s <= detail::step_flat) return one_minus_s <= 0.0 ? 1.0 : 1.0 / (1.0 + std::exp(-1.0 / one_minus_s));
  double g = detail::step_exponent(s, one_minus_s);
  if (g >= 0.0) {
    double e = std::exp(-g);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(g));
}

inline double step(double s) { return step(s, 1.0 - s); }

// B(s) - 1/2 = -tanh(g/2)/2, accurate near s = 1/2.
inline double step_centered(double s, double one_minus_s) {
  if (s <= detail::step_flat || one_minus_s <= detail::step_flat) return step(s, one_minus_s) - 0.5;
  return -0.5 * std::tanh(0.5 * detail::step_exponent(s, one_minus_s));
}

// Same, from the offset d = s - 1/2, so g = -2d / (1/4 - d^2) keeps full precision.
inline double step_centered_offset(double d) {
  double s = 0.5 + d, sc = 0.5 - d;
  if (s <= detail::step_flat || sc <= detail::step_flat) return step(s, sc) - 0.5;
  return -0.5 * std::tanh(-d / (s * sc));
}

inline StepJet step_jet(double s, double one_minus_s) {
  StepJet j;
  if (s <= detail::step_flat) {
    j.value = step(s, one_minus_s);
    return j;
  }
  if (one_minus_s <= detail::step_flat) {
    j.value = step(s, one_minus_s);
    return j;
  }
  double b = step(s, one_minus_s);
  double bc = step(one_minus_s, s);
  double p = b * bc;
  double q = bc - b;  // 1 - 2B
  double is = 1.0 / s;
  double ic = 1.0 / one_minus_s;
  double g1 = -is * is - ic * ic;
  double g2 = 2.0 * is * is * is - 2.0 * ic * ic * ic;
  double g3 = -6.0 * is * is * is * is - 6.0 * ic * ic * ic * ic;
  // sigma(y) = 1/(1+e^y): sigma' = -p, sigma'' = p q, sigma''' = -p q^2 + 2 p^2
  double s1 = -p;
  double s2 = p * q;
  double s3 = -p * q * q + 2.0 * p * p;
  j.value = b;
  j.d1 = s1 * g1;
  j.d2 = s2 * g1 * g1 + s1 * g2;
  j.d3 = s3 * g1 * g1 * g1 + 3.0 * s2 * g1 * g2 + s1 * g3;
  return j;
}

inline StepJet step_jet(double s) { return step_jet(s, 1.0 - s); }

// Integral of B over [0, s] for s in [0, 1].
inline double step_integral(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 0.5 + (s - 1.0);
  if (s > 0.5) return s - 0.5 + step_integral(1.0 - s);
  const auto& rule = GaussLegendre64::instance();
  // Two panels: the flat end and the bulk.
  double cut = std::min(s, 0.15);
  double lo = rule.integrate([](double t) { return step(t); }, 0.0, cut);
  double hi = cut < s ? rule.integrate([](double t) { return step(t); }, cut, s) : 0.0;
  return lo + hi;
}

}  // namespace dlab
