#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <type_traits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chart.hpp"
#include "sequences.hpp"

namespace dlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ChartConfig chart;
  Variant variant = Variant::sec2;
  std::string out_dir = "out";
  std::uint64_t seed = 0xD15704;

  // identity / supports / time law
  std::vector<int> identity_i{2, 4};
  std::size_t identity_grid = 1000;
  double identity_tol = 1e-6;
  double h_tol = 1e-8;
  std::size_t support_samples = 10000;
  double support_tol = 1e-10;
  std::size_t law_pairs = 100;
  double law_tol = 1e-10;

  // growth bound for flows
  std::vector<double> tsuboi_times{0.1, 0.25, 0.5, 1.0};
  std::size_t tsuboi_grid = 2048;
  double tsuboi_slack = 1e-3;
  double quadrature_tol = 1e-8;

  // gap lengths and derivative estimates
  double gap_n_lo = 1e4, gap_n_hi = 1e6;
  std::size_t gap_count = 21;
  double gap_lo = 0.8, gap_hi = 1.25;
  double estimates_n_lo = 256, estimates_n_hi = 65536;
  std::size_t estimates_count = 17;
  std::size_t estimates_grid = 1024;
  double growth_tol = 0.05;
  double d2_band = 4.0;

  // Hoelder sweep
  std::vector<double> alphas_sec2{0.45, 0.55};
  std::vector<double> alphas_sec3{0.7, 0.9};
  int holder_i_lo = 16, holder_i_hi = 800, holder_block_step = 8, holder_per_block = 2;
  std::size_t holder_grid = 48;
  double slope_band_sec2 = 0.1;
  double slope_band_sec3 = 0.2;
  double holder_check_tol = 1e-4;
  double c1_tol = 1e-3;
  double c1_n = 16384;

  // witness
  int witness_k_max = 30;
  int witness_N_search = 20;
  std::size_t witness_grid = 4096;

  // word lengths
  int lengths_i_lo = 6, lengths_i_hi = 20;
  std::uint64_t lengths_n_max = 1000000;
  int lengths_shorter_from = 10;

  // appendix
  std::vector<double> kopell_alphas{0.05, 0.1, 0.25};
  long long kopell_n_lo = 5, kopell_n_hi = 40;
  double kopell_band = 2.0;
  double kopell_rate_tol = 0.15;
  double kopell_ratio_tol = 0.05;

  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  auto fail = [&]() { return ConfigError(key + ": cannot parse '" + v + "'"); };
  if (v.empty()) throw fail();
  if constexpr (std::is_integral_v<T>) {
    if (std::is_unsigned_v<T> && v.front() == '-') throw fail();
    std::size_t used = 0;
    try {
      if constexpr (std::is_unsigned_v<T>) {
        auto x = std::stoull(v, &used, 0);
        if (used == v.size() && x <= std::numeric_limits<T>::max()) return static_cast<T>(x);
      } else {
        auto x = std::stoll(v, &used, 10);
        if (used == v.size() && x >= std::numeric_limits<T>::min() && x <= std::numeric_limits<T>::max())
          return static_cast<T>(x);
      }
    } catch (const std::exception&) {
    }
    // integers written as 1e6
    std::istringstream is(v);
    double d = 0;
    is >> d;
    if (is.fail() || !is.eof() || !(std::fabs(d) < 9e15) || d != std::floor(d)) throw fail();
    if (d < static_cast<double>(std::numeric_limits<T>::min()) || d > static_cast<double>(std::numeric_limits<T>::max()))
      throw fail();
    return static_cast<T>(d);
  } else {
    std::istringstream is(v);
    T out{};
    is >> out;
    if (is.fail() || !is.eof()) throw fail();
    return out;
  }
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  return os.str();
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <class T>
Field num(T RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_number<T>(k, v); },
          [m](const RunConfig& c) {
            std::ostringstream os;
            os.precision(17);
            os << c.*m;
            return os.str();
          }};
}

template <class T>
Field chart_num(T ChartConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.chart.*m = parse_number<T>(k, v); },
          [m](const RunConfig& c) {
            std::ostringstream os;
            os.precision(17);
            os << c.chart.*m;
            return os.str();
          }};
}

template <class T>
Field list(std::vector<T> RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_list<T>(k, v); },
          [m](const RunConfig& c) { return join(c.*m); }};
}

inline const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> F{
      {"chart.delta", chart_num(&ChartConfig::delta)},
      {"chart.overflow_level", chart_num(&ChartConfig::overflow_level)},
      {"chart.grid_default", chart_num(&ChartConfig::grid_default)},
      {"ell.variant",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          try {
            c.variant = parse_variant(v);
          } catch (const std::exception&) {
            throw ConfigError(k + ": expected sec2 or sec3, got '" + v + "'");
          }
        },
        [](const RunConfig& c) { return std::string(to_string(c.variant)); }}},
      {"output.dir",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; }}},
      {"seed", num(&RunConfig::seed)},
      {"identity.i", list(&RunConfig::identity_i)},
      {"identity.grid", num(&RunConfig::identity_grid)},
      {"identity.tol", num(&RunConfig::identity_tol)},
      {"identity.h_tol", num(&RunConfig::h_tol)},
      {"supports.samples", num(&RunConfig::support_samples)},
      {"supports.tol", num(&RunConfig::support_tol)},
      {"law.pairs", num(&RunConfig::law_pairs)},
      {"law.tol", num(&RunConfig::law_tol)},
      {"tsuboi.times", list(&RunConfig::tsuboi_times)},
      {"tsuboi.grid", num(&RunConfig::tsuboi_grid)},
      {"tsuboi.slack", num(&RunConfig::tsuboi_slack)},
      {"tsuboi.quadrature_tol", num(&RunConfig::quadrature_tol)},
      {"gap.n_lo", num(&RunConfig::gap_n_lo)},
      {"gap.n_hi", num(&RunConfig::gap_n_hi)},
      {"gap.count", num(&RunConfig::gap_count)},
      {"gap.lo", num(&RunConfig::gap_lo)},
      {"gap.hi", num(&RunConfig::gap_hi)},
      {"estimates.n_lo", num(&RunConfig::estimates_n_lo)},
      {"estimates.n_hi", num(&RunConfig::estimates_n_hi)},
      {"estimates.count", num(&RunConfig::estimates_count)},
      {"estimates.grid", num(&RunConfig::estimates_grid)},
      {"estimates.growth_tol", num(&RunConfig::growth_tol)},
      {"estimates.d2_band", num(&RunConfig::d2_band)},
      {"holder.alphas.sec2", list(&RunConfig::alphas_sec2)},
      {"holder.alphas.sec3", list(&RunConfig::alphas_sec3)},
      {"holder.i_lo", num(&RunConfig::holder_i_lo)},
      {"holder.i_hi", num(&RunConfig::holder_i_hi)},
      {"holder.block_step", num(&RunConfig::holder_block_step)},
      {"holder.per_block", num(&RunConfig::holder_per_block)},
      {"holder.grid", num(&RunConfig::holder_grid)},
      {"holder.slope_band.sec2", num(&RunConfig::slope_band_sec2)},
      {"holder.slope_band.sec3", num(&RunConfig::slope_band_sec3)},
      {"holder.check_tol", num(&RunConfig::holder_check_tol)},
      {"holder.c1_tol", num(&RunConfig::c1_tol)},
      {"holder.c1_n", num(&RunConfig::c1_n)},
      {"witness.k_max", num(&RunConfig::witness_k_max)},
      {"witness.N_search", num(&RunConfig::witness_N_search)},
      {"witness.grid", num(&RunConfig::witness_grid)},
      {"lengths.i_lo", num(&RunConfig::lengths_i_lo)},
      {"lengths.i_hi", num(&RunConfig::lengths_i_hi)},
      {"lengths.n_max", num(&RunConfig::lengths_n_max)},
      {"lengths.shorter_from", num(&RunConfig::lengths_shorter_from)},
      {"kopell.alphas", list(&RunConfig::kopell_alphas)},
      {"kopell.n_lo", num(&RunConfig::kopell_n_lo)},
      {"kopell.n_hi", num(&RunConfig::kopell_n_hi)},
      {"kopell.band", num(&RunConfig::kopell_band)},
      {"kopell.rate_tol", num(&RunConfig::kopell_rate_tol)},
      {"kopell.ratio_tol", num(&RunConfig::kopell_ratio_tol)},
  };
  return F;
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& F = detail::fields();
  auto it = F.find(key);
  if (it == F.end()) throw ConfigError("unknown key '" + key + "'");
  it->second.set(*this, key, detail::trim(value));
}

inline void RunConfig::validate() const {
  try {
    chart.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto positive = [](double v, const char* k) {
    if (!(v > 0.0)) throw ConfigError(std::string(k) + " must be positive");
  };
  positive(identity_tol, "identity.tol");
  positive(h_tol, "identity.h_tol");
  positive(support_tol, "supports.tol");
  positive(law_tol, "law.tol");
  positive(tsuboi_slack, "tsuboi.slack");
  positive(quadrature_tol, "tsuboi.quadrature_tol");
  positive(growth_tol, "estimates.growth_tol");
  positive(slope_band_sec2, "holder.slope_band.sec2");
  positive(slope_band_sec3, "holder.slope_band.sec3");
  positive(holder_check_tol, "holder.check_tol");
  positive(c1_tol, "holder.c1_tol");
  positive(kopell_rate_tol, "kopell.rate_tol");
  positive(kopell_ratio_tol, "kopell.ratio_tol");
  if (!(d2_band >= 1.0)) throw ConfigError("estimates.d2_band must be at least 1");
  if (!(kopell_band >= 1.0)) throw ConfigError("kopell.band must be at least 1");
  if (!(gap_lo > 0.0 && gap_lo < gap_hi)) throw ConfigError("gap.lo < gap.hi required, both positive");
  for (int i : identity_i)
    if (i < 2 || i % 2 || i > 40) throw ConfigError("identity.i entries must be even, in [2, 40]");
  if (identity_grid == 0 || support_samples == 0 || law_pairs == 0) throw ConfigError("sample counts must be nonzero");
  if (tsuboi_grid < 2 || estimates_grid < 2 || holder_grid < 2 || witness_grid < 2)
    throw ConfigError("grid sizes must be at least 2");
  for (double t : tsuboi_times)
    if (!std::isfinite(t)) throw ConfigError("tsuboi.times must be finite");
  if (!(gap_n_lo >= 16 && gap_n_lo < gap_n_hi) || gap_count < 2) throw ConfigError("gap range empty");
  if (!(estimates_n_lo >= 16 && estimates_n_lo < estimates_n_hi) || estimates_count < 4)
    throw ConfigError("estimates range empty");
  if (holder_i_lo < 2 || holder_i_lo > holder_i_hi || holder_block_step < 1 || holder_per_block < 1 ||
      holder_i_hi > 1000)
    throw ConfigError("holder range empty or beyond 2^1000");
  for (double a : alphas_sec2)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("holder alphas must lie in (0, 1)");
  for (double a : alphas_sec3)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("holder alphas must lie in (0, 1)");
  if (!(c1_n >= 2)) throw ConfigError("holder.c1_n must be at least 2");
  if (witness_k_max < 1 || witness_N_search < 1) throw ConfigError("witness ranges empty");
  if (lengths_i_lo < 2 || lengths_i_lo >= lengths_i_hi || lengths_i_hi > 40 || lengths_n_max < 1)
    throw ConfigError("lengths range empty or beyond i = 40");
  for (double a : kopell_alphas)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("kopell.alphas must lie in (0, 1)");
  if (kopell_n_lo < 1 || kopell_n_lo >= kopell_n_hi || kopell_n_hi > 1020) throw ConfigError("kopell range empty or beyond 1020");
  if (out_dir.empty()) throw ConfigError("output.dir must be nonempty");
}

inline std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, f] : detail::fields()) os << k << " = " << f.get(*this) << '\n';
  return os.str();
}

// key = value per line; '#' starts a comment.
inline RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    try {
      c.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

}  // namespace dlab
