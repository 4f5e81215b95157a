#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "construction.hpp"

namespace dlab {

enum class Sym : std::uint8_t { fhat, f, g, h, hhat, htilde, psi };

inline constexpr std::array<Sym, 7> all_syms{Sym::fhat, Sym::f, Sym::g, Sym::h, Sym::hhat, Sym::htilde, Sym::psi};

inline const char* to_string(Sym s) {
  switch (s) {
    case Sym::fhat: return "fhat";
    case Sym::f: return "f";
    case Sym::g: return "g";
    case Sym::h: return "h";
    case Sym::hhat: return "hhat";
    case Sym::htilde: return "htilde";
    default: return "psi";
  }
}

inline Sym parse_sym(const std::string& s) {
  for (Sym x : all_syms)
    if (s == to_string(x)) return x;
  throw std::invalid_argument("unknown generator '" + s + "'");
}

struct Letter {
  Sym sym;
  long long exp;
  bool operator==(const Letter&) const = default;
};

// Freely reduced word; letters are written left to right and act right to left.
class GroupWord {
 public:
  GroupWord() = default;
  GroupWord(std::initializer_list<Letter> ls) {
    for (const auto& l : ls) push(l);
  }
  static GroupWord letter(Sym s, long long e = 1) {
    GroupWord w;
    w.push({s, e});
    return w;
  }

  // Appends with free reduction against the last letter.
  void push(Letter l) {
    if (l.exp == 0) return;
    if (!letters_.empty() && letters_.back().sym == l.sym) {
      long long e = letters_.back().exp + l.exp;
      length_ -= static_cast<std::uint64_t>(std::llabs(letters_.back().exp));
      letters_.pop_back();
      if (e != 0) {
        letters_.push_back({l.sym, e});
        length_ += static_cast<std::uint64_t>(std::llabs(e));
      }
      return;
    }
    letters_.push_back(l);
    length_ += static_cast<std::uint64_t>(std::llabs(l.exp));
  }

  GroupWord& operator*=(const GroupWord& o) {
    for (const auto& l : o.letters_) push(l);
    return *this;
  }
  friend GroupWord operator*(GroupWord a, const GroupWord& b) { return a *= b; }

  GroupWord inverse() const {
    GroupWord w;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) w.push({it->sym, -it->exp});
    return w;
  }

  GroupWord pow(long long k) const {
    if (k < 0) return inverse().pow(-k);
    GroupWord w;
    for (long long r = 0; r < k; ++r) w *= *this;
    return w;
  }

  const std::vector<Letter>& letters() const { return letters_; }
  std::uint64_t length() const { return length_; }
  bool empty() const { return letters_.empty(); }
  bool operator==(const GroupWord& o) const { return letters_ == o.letters_; }

  std::string serialize() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < letters_.size(); ++k) {
      if (k) os << ' ';
      os << to_string(letters_[k].sym) << '^' << letters_[k].exp;
    }
    return os.str();
  }

  static GroupWord parse(const std::string& text) {
    std::istringstream is(text);
    GroupWord w;
    std::string tok;
    while (is >> tok) {
      auto caret = tok.find('^');
      if (caret == std::string::npos) {
        w.push({parse_sym(tok), 1});
        continue;
      }
      std::size_t used = 0;
      long long e = 0;
      try {
        e = std::stoll(tok.substr(caret + 1), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != tok.size() - caret - 1) throw std::invalid_argument("bad exponent in '" + tok + "'");
      w.push({parse_sym(tok.substr(0, caret)), e});
    }
    return w;
  }

 private:
  std::vector<Letter> letters_;
  std::uint64_t length_ = 0;
};

// Unreduced concatenation, for checking that reduction preserves evaluation.
inline std::vector<Letter> concat_raw(const std::vector<std::vector<Letter>>& parts) {
  std::vector<Letter> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// f^n from fhat f fhat^-1 = f^2, by the binary expansion of n.
inline GroupWord word_f_pow(std::uint64_t n) {
  if (n == 0) return {};
  if (n == 1) return GroupWord::letter(Sym::f);
  GroupWord w = GroupWord::letter(Sym::fhat) * word_f_pow(n / 2) * GroupWord::letter(Sym::fhat, -1);
  if (n % 2) w.push({Sym::f, 1});
  return w;
}

// Length of word_f_pow(n) without building it.
inline std::uint64_t f_pow_length(std::uint64_t n) {
  if (n <= 1) return n;
  return f_pow_length(n / 2) + 2 + (n % 2);
}

// Orientation of the outer fhat conjugation around d^L c d^-L in the sec3 word.
enum class Orientation { fhat_i_first, fhat_minus_i_first };

inline const char* to_string(Orientation o) {
  return o == Orientation::fhat_i_first ? "fhat^i (.) fhat^-i" : "fhat^-i (.) fhat^i";
}

struct IdentityWords {
  int i = 0;
  std::uint64_t n = 0;
  GroupWord a, b, c;  // c = a b a^-1 b^-1
  GroupWord d;        // sec3 only
  std::uint64_t power = 0;  // l_{i/2} (sec2) or L_i (sec3)
  GroupWord h_half;   // word equal to h_{n/2} on the active cells
  GroupWord rhs;      // word equal to fbar^{n/2}
};

inline void check_even(int i) {
  if (i < 2 || i % 2) throw std::domain_error("i must be a positive even integer");
  if (i > 40) throw std::overflow_error("i too large for explicit words");
}

// sec2:  f^{1+n/2} fhat^i c^l fhat^-i f^-1
// sec3:  f^{1+n/2} fhat^i d^L c d^-L fhat^-i f^-1    (default orientation)
inline IdentityWords identity_words(int i, Variant variant, const EllSequence& ell,
                                    Orientation orient = Orientation::fhat_i_first) {
  check_even(i);
  IdentityWords W;
  W.i = i;
  W.n = std::uint64_t{1} << i;
  GroupWord Fi = GroupWord::letter(Sym::fhat, i), Fmi = GroupWord::letter(Sym::fhat, -i);
  GroupWord fn = word_f_pow(W.n), fmn = fn.inverse();
  auto conj = [&](Sym s) { return Fmi * fmn * GroupWord::letter(s) * fn * Fi; };
  W.a = conj(Sym::h);
  GroupWord psi = GroupWord::letter(Sym::psi);
  W.b = psi * conj(Sym::hhat) * psi.inverse();
  W.c = W.a * W.b * W.a.inverse() * W.b.inverse();
  GroupWord core;
  if (variant == Variant::sec2) {
    W.power = ell.ell(i / 2);
    core = W.c.pow(static_cast<long long>(W.power));
  } else {
    W.power = ell.L(i);
    W.d = conj(Sym::htilde);
    GroupWord dL = W.d.pow(static_cast<long long>(W.power));
    core = dL * W.c * dL.inverse();
  }
  if (variant == Variant::sec3 && orient == Orientation::fhat_minus_i_first)
    W.h_half = Fmi * core * Fi;
  else
    W.h_half = Fi * core * Fmi;
  W.rhs = word_f_pow(1 + W.n / 2) * W.h_half * GroupWord::letter(Sym::f, -1);
  return W;
}

inline GroupWord word_identity_rhs(int i, Variant variant, const EllSequence& ell) {
  return identity_words(i, variant, ell).rhs;
}

inline std::uint64_t word_length(const GroupWord& w) { return w.length(); }

struct DistortionRow {
  int i = 0;
  std::uint64_t length = 0;
  double ratio = 0.0;       // length / 2^{i-1}
  double form = 0.0;        // i l_{i/2} (sec2) or i sqrt(l) log2(l) (sec3)
  double form_ratio = 0.0;  // form / 2^{i-1}
};

inline std::vector<DistortionRow> distortion_table(int i_max, Variant variant) {
  EllSequence ell(variant);
  std::vector<DistortionRow> rows;
  for (int i = 2; i <= i_max; i += 2) {
    DistortionRow r;
    r.i = i;
    r.length = identity_words(i, variant, ell).rhs.length();
    double half = std::ldexp(1.0, i - 1);
    r.ratio = static_cast<double>(r.length) / half;
    if (variant == Variant::sec2)
      r.form = i * static_cast<double>(ell.ell(i / 2));
    else
      r.form = i * static_cast<double>(ell.L(i));
    r.form_ratio = r.form / half;
    rows.push_back(r);
  }
  return rows;
}

// ---- evaluation ----

struct WordValue {
  Point point;
  double log_deriv = 0.0;  // log D(word) at the input, summed along the orbit
};

// Streams points through the letters, right to left. Letter maps are built once.
class WordEvaluator {
 public:
  WordEvaluator(const GeneratorSet& G, std::vector<Letter> letters) : G_(&G), letters_(std::move(letters)) {
    for (const auto& l : letters_) {
      auto key = std::make_pair(l.sym, l.exp);
      if (!maps_.count(key)) maps_[key] = build(l);
    }
  }
  WordEvaluator(const GeneratorSet& G, const GroupWord& w) : WordEvaluator(G, w.letters()) {}

  Point apply(Point p) const {
    const Chart& c = *G_->chart;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) {
      const Step& st = maps_.at({it->sym, it->exp});
      for (long long r = 0; r < st.repeat; ++r) p = c.canonical(st.map->apply(p));
    }
    return p;
  }

  WordValue apply_with_log_deriv(Point p) const {
    const Chart& c = *G_->chart;
    WordValue out;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) {
      const Step& st = maps_.at({it->sym, it->exp});
      for (long long r = 0; r < st.repeat; ++r) {
        out.log_deriv += st.map->jet(p).L;
        p = c.canonical(st.map->apply(p));
      }
    }
    out.point = p;
    return out;
  }

  std::size_t size() const { return letters_.size(); }

 private:
  struct Step {
    DiffeoPtr map;
    long long repeat = 1;
  };

  Step build(const Letter& l) const {
    const auto& c = G_->chart;
    std::string label = std::string(to_string(l.sym)) + "^" + std::to_string(l.exp);
    auto e = static_cast<double>(l.exp);
    switch (l.sym) {
      case Sym::f: return {std::make_shared<ChartFlowMap>(c, FieldKind::translation, e, label), 1};
      case Sym::fhat: return {std::make_shared<ChartFlowMap>(c, FieldKind::dilation, e, label), 1};
      case Sym::psi: return {G_->get("psi", l.exp > 0 ? 1 : -1), std::llabs(l.exp)};
      default: {
        auto base = std::dynamic_pointer_cast<const CellwiseFlow>(G_->get(to_string(l.sym), 1));
        if (!base) throw std::logic_error("pasted generator is not cellwise");
        return {base->scaled(e, label), 1};
      }
    }
  }

  const GeneratorSet* G_;
  std::vector<Letter> letters_;
  std::map<std::pair<Sym, long long>, Step> maps_;
};

inline Point evaluate_word(const GeneratorSet& G, const GroupWord& w, const Point& p) {
  return WordEvaluator(G, w).apply(p);
}

inline std::vector<Point> evaluate_word(const GeneratorSet& G, const GroupWord& w, const std::vector<Point>& pts) {
  WordEvaluator ev(G, w);
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(ev.apply(p));
  return out;
}

}  // namespace dlab
