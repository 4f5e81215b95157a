#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

namespace dlab {

// The one extended-precision type. Only gap lengths and Hoelder denominators use it.
using wide = long double;

inline constexpr double ln2 = 0.69314718055994530942;

// Fixed-order Gauss-Legendre rule; nodes from the Legendre zeros.
template <std::size_t N>
class GaussLegendre {
 public:
  GaussLegendre() {
    auto zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(N));
    std::size_t k = 0;
    for (double z : zeros) {
      double dp = boost::math::legendre_p_prime<double>(static_cast<int>(N), z);
      double w = 2.0 / ((1.0 - z * z) * dp * dp);
      if (z == 0.0) {
        nodes_[k] = 0.0;
        weights_[k++] = w;
      } else {
        nodes_[k] = z;
        weights_[k++] = w;
        nodes_[k] = -z;
        weights_[k++] = w;
      }
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t k = 0; k < N; ++k) sum += weights_[k] * f(mid + half * nodes_[k]);
    return sum * half;
  }

  static const GaussLegendre& instance() {
    static const GaussLegendre rule;
    return rule;
  }

 private:
  std::array<double, N> nodes_{};
  std::array<double, N> weights_{};
};

using GaussLegendre64 = GaussLegendre<64>;

// Adaptive Gauss-Kronrod; returns the integral and the error estimate.
template <class F>
std::pair<double, double> integrate_adaptive(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 10) {
  double err = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      std::forward<F>(f), a, b, max_depth, tol, &err);
  return {value, err};
}

// Golden-section refinement of a maximum bracketed by [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, int iterations = 60) {
  const double r = 0.61803398874989484820;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < iterations && b - a > 1e-15 * (1.0 + std::fabs(a)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

// Least-squares slope of y against x.
inline double fit_slope(const double* x, const double* y, std::size_t n) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace dlab
