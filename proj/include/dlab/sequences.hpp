#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dlab {

enum class Variant { sec2, sec3 };

inline const char* to_string(Variant v) { return v == Variant::sec2 ? "sec2" : "sec3"; }

inline Variant parse_variant(const std::string& s) {
  if (s == "sec2") return Variant::sec2;
  if (s == "sec3") return Variant::sec3;
  throw std::invalid_argument("invalid variant '" + s + "' (expected sec2 or sec3)");
}

inline int ceil_log2(std::uint64_t x) {
  int r = 0;
  while ((std::uint64_t{1} << r) < x) ++r;
  return r;
}

// l_j for j >= 1.
//   sec2: ceil(4^j / j^2)
//   sec3: 4^{m_j}, m_j = max(1, 2j - ceil(3 log2(2j)))
class EllSequence {
 public:
  explicit EllSequence(Variant v = Variant::sec2) : variant_(v) {}

  Variant variant() const { return variant_; }

  // Exponent m_j of the sec3 sequence. ceil(3 log2(2j)) = ceil(log2((2j)^3)).
  static int m(int j) {
    if (j < 1) throw std::domain_error("ell: index must be positive");
    auto c = static_cast<std::uint64_t>(2 * j);
    int e = ceil_log2(c * c * c);
    return std::max(1, 2 * j - e);
  }

  // Exact l_j; throws when it does not fit in 64 bits.
  std::uint64_t ell(int j) const {
    if (j < 1) throw std::domain_error("ell: index must be positive");
    if (variant_ == Variant::sec2) {
      if (j > 31) throw std::overflow_error("ell: 4^j exceeds 64 bits");
      std::uint64_t num = std::uint64_t{1} << (2 * j);
      std::uint64_t den = static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(j);
      return (num + den - 1) / den;
    }
    int mj = m(j);
    if (mj > 31) throw std::overflow_error("ell: 4^m exceeds 64 bits");
    return std::uint64_t{1} << (2 * mj);
  }

  // sqrt(l_j) as a double, for indices far beyond the exact range.
  double sqrt_ell(int j) const {
    if (j < 1) throw std::domain_error("ell: index must be positive");
    if (variant_ == Variant::sec3) return std::ldexp(1.0, m(j));
    if (j <= 31) return std::sqrt(static_cast<double>(ell(j)));
    return std::ldexp(1.0, j) / j;  // ceil is invisible at this size
  }

  // L_i = sqrt(l_{i/2}) log2(l_{i/2}), integral for sec3.
  std::uint64_t L(int i) const {
    if (variant_ != Variant::sec3) throw std::logic_error("L_i is defined for the sec3 sequence only");
    if (i < 2 || i % 2) throw std::domain_error("L_i: i must be a positive even integer");
    int mj = m(i / 2);
    if (mj > 56) throw std::overflow_error("L_i exceeds 64 bits");
    return (std::uint64_t{1} << mj) * static_cast<std::uint64_t>(2 * mj);
  }

 private:
  Variant variant_;
};

// Flow times per cell k: nonzero only for 2^{i-1} <= k < 2^i with i even and positive.
class TimeSequences {
 public:
  explicit TimeSequences(EllSequence ell) : ell_(ell) {}

  const EllSequence& ell() const { return ell_; }

  // The i with 2^{i-1} <= k < 2^i, or 0 for k < 1.
  static int block(double k) {
    if (!(k >= 1.0)) return 0;
    return std::ilogb(k) + 1;
  }
  static bool active(double k) {
    int i = block(k);
    return i > 0 && i % 2 == 0;
  }

  double t(double k) const {
    if (!active(k)) return 0.0;
    return 1.0 / ell_.sqrt_ell(block(k) / 2);
  }
  double r(double k) const { return t(k); }
  double s(double k) const {
    if (!active(k)) return 0.0;
    return std::log1p(-1.0 / ell_.sqrt_ell(block(k) / 2)) / std::log(2.0);
  }

 private:
  EllSequence ell_;
};

}  // namespace dlab
