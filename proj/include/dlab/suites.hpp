#pragma once

#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "kopell.hpp"
#include "verify.hpp"

namespace dlab {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, Csv>> tables;  // file name, table
  std::vector<std::pair<std::string, std::string>> texts;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline Check bound_check(std::string name, double value, double bound, const char* rel = "<") {
  bool ok = std::string(rel) == "<" ? value < bound : value <= bound;
  return {std::move(name), ok, fmt(value) + " " + rel + " " + fmt(bound)};
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

// Equal neighbours allowed (blocks with equal l share one cell map). Ties drift by ~1e-5
// relative at n ~ 2^11 because grid levels n + v lose bits as n grows.
inline bool nonincreasing_with_drop(const std::vector<double>& v, double tie = 1e-4) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1] * (1.0 + tie)) return false;
  return v.size() > 1 && v.back() < v.front();
}

inline std::string vtag(Variant v) { return to_string(v); }

}  // namespace detail

// ---- identity: word identities, h_{n/2}, the commutator time law ----

inline SuiteResult suite_identity(const RunConfig& cfg, Variant variant) {
  SuiteResult R{"identity", {}, {}, {}};
  auto G = make_generators(cfg.chart, variant);
  Csv t({"variant", "i", "orientation", "samples", "word_length", "discrepancy", "h_half_discrepancy", "signal"});
  for (int i : cfg.identity_i) {
    auto r = verify_identity(G, i, cfg.identity_grid, cfg.identity_tol, Orientation::fhat_i_first, cfg.h_tol);
    std::string tag = detail::vtag(variant) + " i=" + std::to_string(i);
    R.checks.push_back(detail::bound_check("identity " + tag, r.discrepancy, r.tol));
    R.checks.push_back(detail::bound_check("h_half " + tag, r.h_half_discrepancy, r.h_tol));
    t.row(detail::vtag(variant), i, r.orientation, r.samples, r.word_length, r.discrepancy, r.h_half_discrepancy,
          r.signal);
  }
  R.tables.emplace_back("identity_" + detail::vtag(variant) + ".csv", t);

  if (variant == Variant::sec3) {
    Csv o({"i", "direct_left", "fhat_i_first_left", "fhat_minus_i_first_left", "chosen"});
    for (int i : cfg.identity_i) {
      auto r = orientation_by_support(G, i);
      o.row(i, r.direct_left, r.fhat_i_first_left, r.fhat_minus_i_first_left, std::string(to_string(r.chosen)));
      R.checks.push_back({"orientation i=" + std::to_string(i), r.chosen == Orientation::fhat_i_first,
                          std::string(to_string(r.chosen))});
    }
    R.tables.emplace_back("orientation.csv", o);
  }

  auto law = time_law_check(G.cells, cfg.law_pairs, cfg.seed, cfg.law_tol);
  Csv l({"case", "value"});
  l.row(std::string("pairs"), static_cast<double>(law.pairs));
  l.row(std::string("worst_cell"), law.worst_cell);
  l.row(std::string("worst_chart"), law.worst_chart);
  l.row(std::string("min_signal"), law.min_signal);
  for (const auto& [ell, e] : law.ell_rows) l.row("ell=" + std::to_string(ell), e);
  R.tables.emplace_back("time_law_" + detail::vtag(variant) + ".csv", l);
  R.checks.push_back(detail::bound_check("time law random pairs", std::max(law.worst_cell, law.worst_chart), law.tol));
  for (const auto& [ell, e] : law.ell_rows)
    R.checks.push_back(detail::bound_check("time law ell=" + std::to_string(ell), e, law.tol));
  return R;
}

// ---- supports ----

inline SuiteResult suite_supports(const RunConfig& cfg, Variant variant) {
  SuiteResult R{"supports", {}, {}, {}};
  auto G = make_generators(cfg.chart, variant);
  Csv t({"variant", "i", "claim", "support", "off_support", "on_support", "worst", "signal", "pass"});
  for (int i : cfg.identity_i) {
    for (const auto& c : verify_supports(G, i, cfg.support_samples, cfg.support_tol, cfg.seed)) {
      t.row(detail::vtag(variant), i, c.name, c.support, c.off_support, c.on_support, c.worst, c.signal, c.pass);
      R.checks.push_back(detail::bound_check(
          "support " + detail::vtag(variant) + " i=" + std::to_string(i) + " " + c.name, c.worst, c.tol));
    }
  }
  R.tables.emplace_back("supports_" + detail::vtag(variant) + ".csv", t);
  return R;
}

// ---- growth bound for flows ----

inline SuiteResult suite_tsuboi(const RunConfig& cfg) {
  SuiteResult R{"tsuboi", {}, {}, {}};
  auto G = make_generators(cfg.chart, cfg.variant);
  Csv t({"field", "t", "C1", "C2", "lhs", "bound", "slack"});
  for (auto kind : {FieldKind::translation, FieldKind::dilation}) {
    for (auto F : {FlowField{kind, Conjugation::fundamental, 0}, FlowField{kind, Conjugation::cell, 5}}) {
      auto r = pixton_tsuboi_check(G.cells, F, cfg.tsuboi_times, cfg.tsuboi_grid, cfg.tsuboi_slack);
      for (const auto& row : r.rows) t.row(r.field, row.t, r.C1, r.C2, row.lhs, row.bound, row.slack);
      R.checks.push_back({"bound " + r.field, r.pass, "min slack " + detail::fmt(r.min_slack)});
      R.checks.push_back(detail::bound_check("quadrature " + r.field, r.quadrature_error, cfg.quadrature_tol));
    }
  }
  R.tables.emplace_back("tsuboi.csv", t);
  return R;
}

// ---- gap lengths and derivative estimates ----

inline SuiteResult suite_estimates(const RunConfig& cfg) {
  SuiteResult R{"estimates", {}, {}, {}};
  auto G = make_generators(cfg.chart, cfg.variant);
  auto rows = gap_asymptotics(*G.chart, cfg.gap_n_lo, cfg.gap_n_hi, cfg.gap_count);
  Csv g({"n", "gap", "ratio"});
  double lo = 1e300, hi = 0.0;
  for (const auto& r : rows) {
    g.row(r.n, r.gap, r.ratio);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  R.tables.emplace_back("gap.csv", g);
  R.checks.push_back({"gap ratio band", lo >= cfg.gap_lo && hi <= cfg.gap_hi,
                      "[" + detail::fmt(lo) + ", " + detail::fmt(hi) + "] in [" + detail::fmt(cfg.gap_lo) + ", " +
                          detail::fmt(cfg.gap_hi) + "]"});
  double e0 = std::fabs(rows.front().ratio - 1.0), e1 = std::fabs(rows.back().ratio - 1.0);
  R.checks.push_back({"gap ratio trend toward 1", e1 < e0, detail::fmt(e0) + " -> " + detail::fmt(e1)});

  Csv t({"kind", "n", "d1", "d2_scaled", "affine", "schwarzian"});
  auto ns = log_spaced(cfg.estimates_n_lo, cfg.estimates_n_hi, cfg.estimates_count);
  for (auto kind : {FieldKind::translation, FieldKind::dilation}) {
    auto r = derivative_estimates(G.cells, kind, ns, cfg.estimates_grid, cfg.growth_tol, cfg.d2_band);
    std::string k = to_string(kind);
    for (const auto& w : r.rows) t.row(k, w.n, w.d1, w.d2_scaled, w.affine, w.schwarzian);
    R.checks.push_back(detail::bound_check("D pushforward bounded " + k + " (slope)", r.slopes[0], cfg.growth_tol));
    R.checks.push_back(detail::bound_check("affine bounded " + k + " (slope)", r.slopes[2], cfg.growth_tol));
    R.checks.push_back(detail::bound_check("schwarzian bounded " + k + " (slope)", r.slopes[3], cfg.growth_tol));
    R.checks.push_back(detail::bound_check("D2 pushforward band " + k, r.d2_band, cfg.d2_band, "<="));
  }
  R.tables.emplace_back("estimates.csv", t);
  return R;
}

// ---- Hoelder quotients and the C^1 echo ----

inline SuiteResult suite_holder(const RunConfig& cfg, Variant variant) {
  SuiteResult R{"holder", {}, {}, {}};
  auto G = make_generators(cfg.chart, variant);
  const auto& alphas = variant == Variant::sec2 ? cfg.alphas_sec2 : cfg.alphas_sec3;
  double band = variant == Variant::sec2 ? cfg.slope_band_sec2 : cfg.slope_band_sec3;
  auto ns = holder_cells(cfg.holder_i_lo, cfg.holder_i_hi, cfg.holder_block_step, cfg.holder_per_block);
  Csv t({"variant", "alpha", "n", "t", "log_A", "log_gap", "log_Q"});
  Csv s({"variant", "alpha", "slope", "expected", "verdict", "cross_cell_ratio", "check_error"});
  for (double al : alphas) {
    auto r = holder_sweep(G, al, ns, cfg.holder_grid, cfg.seed);
    std::string tag = detail::vtag(variant) + " alpha=" + detail::fmt(al);
    for (const auto& w : r.rows) t.row(detail::vtag(variant), al, w.n, w.t, w.log_A, w.log_gap, w.log_Q);
    s.row(detail::vtag(variant), al, r.slope, r.expected, std::string(r.bounded ? "bounded" : "diverging"),
          r.cross_cell_ratio, r.check_error);
    bool want_bounded = r.expected < 0.0;
    R.checks.push_back({"slope " + tag, std::fabs(r.slope - r.expected) <= band,
                        detail::fmt(r.slope) + " vs " + detail::fmt(r.expected) + " +- " + detail::fmt(band)});
    R.checks.push_back({"verdict " + tag, r.bounded == want_bounded, r.bounded ? "bounded" : "diverging"});
    R.checks.push_back(detail::bound_check("cross-cell " + tag, r.cross_cell_ratio, 2.0, "<="));
    R.checks.push_back(detail::bound_check("analytic vs direct " + tag, r.check_error, cfg.holder_check_tol));
  }
  R.tables.emplace_back("holder_" + detail::vtag(variant) + ".csv", t);
  R.tables.emplace_back("holder_summary_" + detail::vtag(variant) + ".csv", s);

  // One cell per active block, n = 2^{i-1}.
  int i_hi = 2;
  while (std::ldexp(1.0, i_hi - 1) < 64.0 * cfg.c1_n) i_hi += 2;
  auto rows = c1_pasting_echo(G, holder_cells(2, i_hi, 2, 1));
  Csv c({"variant", "n", "sup_log_deriv"});
  std::vector<double> sups;
  double tail = 0.0;
  for (const auto& w : rows) {
    c.row(detail::vtag(variant), w.n, w.sup_log_deriv);
    sups.push_back(w.sup_log_deriv);
    if (w.n >= cfg.c1_n) tail = std::max(tail, w.sup_log_deriv);
  }
  R.tables.emplace_back("c1_" + detail::vtag(variant) + ".csv", c);
  R.checks.push_back({"C1 echo non-increasing " + detail::vtag(variant), detail::nonincreasing_with_drop(sups), ""});
  R.checks.push_back(detail::bound_check("C1 echo n>=" + detail::fmt(cfg.c1_n) + " " + detail::vtag(variant), tail,
                                         cfg.c1_tol));
  return R;
}

// ---- the undistortion witness ----

inline SuiteResult suite_witness(const RunConfig& cfg) {
  SuiteResult R{"witness", {}, {}, {}};
  auto G = make_generators(cfg.chart, cfg.variant);
  WitnessReport r;
  try {
    r = undistortion_witness(G, cfg.witness_k_max, cfg.witness_N_search, cfg.witness_grid);
  } catch (const WitnessNotFound& e) {
    R.checks.push_back({"witness N found", false, e.what()});
    return R;
  }
  R.checks.push_back({"witness N found", true, "N=" + std::to_string(r.N) + " lambda=" + detail::fmt(r.lambda)});
  Csv t({"k", "y", "value", "endpoint"});
  double vmin = 1e300, emax = 0.0;
  for (const auto& w : r.rows) {
    t.row(w.k, w.y, w.value, w.endpoint);
    vmin = std::min(vmin, w.value);
    emax = std::max(emax, w.endpoint);
  }
  Csv v({"n", "variation", "bound"});
  bool var_ok = true;
  for (const auto& [n, var] : r.variation) {
    double bound = 0.95 * n * std::log(r.lambda);
    v.row(n, var, bound);
    var_ok = var_ok && var >= bound;
  }
  Csv s({"V", "N", "lambda", "sup_log_DgN", "variation_slope"});
  s.row(r.V, r.N, r.lambda, r.sup_log_DgN, r.variation_slope);
  R.tables.emplace_back("witness.csv", t);
  R.tables.emplace_back("witness_variation.csv", v);
  R.tables.emplace_back("witness_summary.csv", s);
  R.checks.push_back({"witness values >= lambda", vmin >= r.lambda, detail::fmt(vmin) + " >= " + detail::fmt(r.lambda)});
  R.checks.push_back(detail::bound_check("endpoint derivatives", emax, 1e-8, "<="));
  R.checks.push_back({"variation >= 0.95 n ln lambda", var_ok, ""});
  R.checks.push_back({"variation slope", r.variation_slope >= 0.95 * std::log(r.lambda),
                      detail::fmt(r.variation_slope) + " >= " + detail::fmt(0.95 * std::log(r.lambda))});
  return R;
}

// ---- word lengths ----

inline SuiteResult suite_lengths(const RunConfig& cfg) {
  SuiteResult R{"lengths", {}, {}, {}};
  std::uint64_t worst_n = 0;
  double worst_margin = 1e300;
  bool ok = true;
  for (std::uint64_t n = 1; n <= cfg.lengths_n_max; ++n) {
    auto len = word_f_pow(n).length();
    double bound = 4.0 * std::floor(std::log2(static_cast<double>(n))) + 1.0;
    double margin = bound - static_cast<double>(len);
    if (margin < worst_margin) {
      worst_margin = margin;
      worst_n = n;
    }
    ok = ok && margin >= 0.0 && len == f_pow_length(n);
  }
  R.checks.push_back({"f^n word length <= 4 floor(log2 n) + 1", ok,
                      "n <= " + std::to_string(cfg.lengths_n_max) + ", tightest at n=" + std::to_string(worst_n)});
  Csv t({"variant", "i", "length", "ratio", "form", "form_ratio"});
  std::map<Variant, std::vector<DistortionRow>> tab;
  for (auto v : {Variant::sec2, Variant::sec3}) {
    for (const auto& r : distortion_table(cfg.lengths_i_hi, v)) {
      t.row(detail::vtag(v), r.i, r.length, r.ratio, r.form, r.form_ratio);
      if (r.i >= cfg.lengths_i_lo) tab[v].push_back(r);
    }
    std::vector<double> ratio, form;
    for (const auto& r : tab[v]) {
      ratio.push_back(r.ratio);
      form.push_back(r.form_ratio);
    }
    std::string range = " i=" + std::to_string(cfg.lengths_i_lo) + ".." + std::to_string(cfg.lengths_i_hi);
    R.checks.push_back({"length ratio decreasing " + detail::vtag(v) + range, detail::strictly_decreasing(ratio), ""});
    R.checks.push_back({"form ratio decreasing " + detail::vtag(v) + range, detail::strictly_decreasing(form), ""});
  }
  bool shorter = true;
  for (std::size_t k = 0; k < tab[Variant::sec2].size(); ++k) {
    const auto &a = tab[Variant::sec2][k], &b = tab[Variant::sec3][k];
    if (a.i >= cfg.lengths_shorter_from && !(b.length < a.length)) shorter = false;
  }
  R.checks.push_back({"sec3 shorter than sec2 for i >= " + std::to_string(cfg.lengths_shorter_from), shorter, ""});
  R.tables.emplace_back("lengths.csv", t);
  return R;
}

// ---- words: serialization and evaluation of the identity words ----

inline SuiteResult suite_words(const RunConfig& cfg, Variant variant) {
  SuiteResult R{"words", {}, {}, {}};
  auto G = make_generators(cfg.chart, variant);
  Csv t({"variant", "i", "word", "letters", "length"});
  bool round_trip = true;
  for (int i : cfg.identity_i) {
    auto W = identity_words(i, variant, G.ell);
    for (const auto& [name, w] : std::vector<std::pair<std::string, const GroupWord*>>{
             {"a", &W.a}, {"b", &W.b}, {"c", &W.c}, {"h_half", &W.h_half}, {"rhs", &W.rhs}}) {
      t.row(detail::vtag(variant), i, name, w->letters().size(), w->length());
      round_trip = round_trip && GroupWord::parse(w->serialize()) == *w;
    }
    if (variant == Variant::sec3) t.row(detail::vtag(variant), i, std::string("d"), W.d.letters().size(), W.d.length());
    R.texts.emplace_back("word_rhs_" + detail::vtag(variant) + "_i" + std::to_string(i) + ".txt", W.rhs.serialize() + "\n");
  }
  R.checks.push_back({"serialize/parse round trip", round_trip, ""});

  // f^7 by its binary word; a commutator reduced against its raw letters.
  auto w7 = word_f_pow(7);
  WordEvaluator ev(G, w7);
  double e7 = 0.0;
  for (double u : {-3.5, 0.25, 10.0}) e7 = std::max(e7, G.chart->distance(ev.apply(Point::level(u)), Point::level(u + 7.0)));
  R.checks.push_back(detail::bound_check("word f^7 acts as translation by 7", e7, cfg.identity_tol));
  auto W = identity_words(2, variant, G.ell);
  std::vector<Letter> raw = concat_raw({W.a.letters(), W.b.letters(), W.a.inverse().letters(), W.b.inverse().letters()});
  WordEvaluator reduced(G, W.c), unreduced(G, raw);
  double ec = 0.0;
  for (double u : {-0.4, -0.25, -0.1, 0.5})
    ec = std::max(ec, G.chart->distance(reduced.apply(Point::level(u)), unreduced.apply(Point::level(u))));
  R.checks.push_back(detail::bound_check("reduction preserves evaluation", ec, cfg.identity_tol));
  R.tables.emplace_back("words_" + detail::vtag(variant) + ".csv", t);
  return R;
}

// ---- the appendix counterexample ----

inline SuiteResult suite_kopell(const RunConfig& cfg) {
  using namespace kopell;
  SuiteResult R{"kopell", {}, {}, {}};
  auto gap = gap_bound_check(cfg.kopell_n_lo, cfg.kopell_n_hi);
  Csv g({"n", "scaled_gap", "identity_error"});
  double ie = 0.0;
  for (const auto& r : gap.rows) {
    g.row(r.n, r.scaled, r.identity_error);
    ie = std::max(ie, r.identity_error);
  }
  R.tables.emplace_back("kopell_gap.csv", g);
  R.checks.push_back(detail::bound_check("2^n gap band", gap.band, cfg.kopell_band, "<="));
  R.checks.push_back(detail::bound_check("factored gap identity", ie, 1e-12, "<="));

  auto hb = holder_blowup(cfg.kopell_alphas, cfg.kopell_n_lo, cfg.kopell_n_hi);
  Csv t({"n", "alpha", "Q", "prediction", "ratio"});
  for (const auto& r : hb.rows) t.row(r.n, r.alpha, r.Q, r.prediction, r.ratio);
  R.tables.emplace_back("kopell.csv", t);
  R.checks.push_back({"Dg(f^n a) = 1", hb.endpoint_deviation == 0.0, detail::fmt(hb.endpoint_deviation)});
  R.checks.push_back(detail::bound_check("n |Dg(f^n b) - Dg(f^n a)| band", hb.jump_band, cfg.kopell_band, "<="));
  for (const auto& [al, rate] : hb.rates) {
    double target = al * ln2;
    R.checks.push_back({"divergence rate alpha=" + detail::fmt(al), std::fabs(rate / target - 1.0) <= cfg.kopell_rate_tol,
                        detail::fmt(rate) + " vs " + detail::fmt(target)});
  }

  Csv c({"n", "k", "sup", "n_sup"});
  std::vector<long long> ns{10, 100, 1000, 10000};
  auto conv = gn_convergence(ns);
  for (int k = 0; k < 3; ++k) {
    double lo = 1e300, hi = 0.0;
    for (const auto& r : conv) {
      c.row(r.n, k + 1, r.sup[k], r.scaled[k]);
      lo = std::min(lo, r.scaled[k]);
      hi = std::max(hi, r.scaled[k]);
    }
    R.checks.push_back(detail::bound_check("g_n -> id C" + std::to_string(k + 1) + " rate 1/n", hi / lo - 1.0,
                                           cfg.kopell_ratio_tol, "<="));
  }
  R.tables.emplace_back("kopell_convergence.csv", c);

  Csv e({"n", "sup_log_deriv", "n_sup"});
  std::vector<double> sups, env;
  double tail = 0.0;
  for (long long n = 1; n <= 16384; n *= 2) {
    double s = PastedG::sup_log_deriv(n);
    e.row(n, s, static_cast<double>(n) * s);
    sups.push_back(s);
    env.push_back(static_cast<double>(n) * s);
    if (n >= static_cast<long long>(cfg.c1_n)) tail = std::max(tail, s);
  }
  R.tables.emplace_back("kopell_c1.csv", e);
  double elo = *std::min_element(env.begin() + env.size() / 2, env.end());
  double ehi = *std::max_element(env.begin() + env.size() / 2, env.end());
  R.checks.push_back({"pasted g C1 decreasing", detail::strictly_decreasing(sups), ""});
  R.checks.push_back(detail::bound_check("pasted g 1/n envelope band", ehi / elo, cfg.kopell_band, "<="));
  R.checks.push_back(detail::bound_check("pasted g n>=" + detail::fmt(cfg.c1_n), tail, cfg.c1_tol));
  return R;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"identity", "supports", "holder", "lengths", "witness",
                                          "estimates", "tsuboi", "kopell", "words", "all"};
  return s;
}

// Jobs for a subcommand. Variant-dependent suites use the configured variant,
// except under "all", which runs both.
inline std::vector<std::function<SuiteResult()>> suite_jobs(const std::string& sub, const RunConfig& cfg) {
  std::vector<std::function<SuiteResult()>> jobs;
  std::vector<Variant> vs{cfg.variant};
  if (sub == "all") vs = {Variant::sec2, Variant::sec3};
  auto per_variant = [&](auto fn) {
    for (auto v : vs) jobs.emplace_back([&cfg, v, fn] { return fn(cfg, v); });
  };
  bool all = sub == "all";
  if (all || sub == "identity") per_variant(suite_identity);
  if (all || sub == "supports") per_variant(suite_supports);
  if (all || sub == "tsuboi") jobs.emplace_back([&cfg] { return suite_tsuboi(cfg); });
  if (all || sub == "estimates") jobs.emplace_back([&cfg] { return suite_estimates(cfg); });
  if (all || sub == "holder") per_variant(suite_holder);
  if (all || sub == "witness") jobs.emplace_back([&cfg] { return suite_witness(cfg); });
  if (all || sub == "lengths") jobs.emplace_back([&cfg] { return suite_lengths(cfg); });
  if (all || sub == "words") per_variant(suite_words);
  if (all || sub == "kopell") jobs.emplace_back([&cfg] { return suite_kopell(cfg); });
  if (jobs.empty()) throw std::invalid_argument("unknown subcommand '" + sub + "'");
  return jobs;
}

}  // namespace dlab
