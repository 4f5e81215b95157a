#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include <dlab/dlab.hpp>

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string variant;
  std::vector<int> i;
  std::vector<double> alpha;
  long long nmax = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;
  bool parallel = false;
  std::vector<std::string> sets;
};

dlab::RunConfig make_config(const std::string& sub, const Flags& f) {
  dlab::RunConfig cfg = f.config.empty() ? dlab::RunConfig{} : dlab::RunConfig::from_file(f.config);
  for (const auto& kv : f.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw dlab::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(dlab::detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.variant.empty()) cfg.set("ell.variant", f.variant);
  if (f.have_seed) cfg.seed = f.seed;
  if (!f.i.empty()) cfg.identity_i = f.i;
  if (!f.alpha.empty()) {
    if (sub == "kopell") cfg.kopell_alphas = f.alpha;
    else if (cfg.variant == dlab::Variant::sec2) cfg.alphas_sec2 = f.alpha;
    else cfg.alphas_sec3 = f.alpha;
  }
  if (f.nmax > 0) {
    if (sub == "kopell") cfg.kopell_n_hi = f.nmax;
    else if (sub == "lengths") cfg.lengths_n_max = static_cast<std::uint64_t>(f.nmax);
    else if (sub == "estimates") cfg.estimates_n_hi = static_cast<double>(f.nmax);
    else throw dlab::ConfigError("--nmax applies to kopell, lengths and estimates only");
  }
  cfg.validate();
  return cfg;
}

void emit(const dlab::SuiteResult& r, const fs::path& out, double seconds) {
  for (const auto& [name, table] : r.tables) table.write(out / name);
  for (const auto& [name, text] : r.texts) {
    std::ofstream o(out / name, std::ios::binary);
    o << text;
  }
  for (const auto& c : r.checks)
    std::printf("%s %s: %s%s%s\n", c.pass ? "PASS" : "FAIL", r.suite.c_str(), c.name.c_str(), c.detail.empty() ? "" : "  ",
                c.detail.c_str());
  std::printf("%s suite %s (%zu checks, %.1f s)\n", r.pass() ? "PASS" : "FAIL", r.suite.c_str(), r.checks.size(), seconds);
  std::fflush(stdout);
}

int run(const std::string& sub, const dlab::RunConfig& cfg, bool parallel) {
  fs::path out(cfg.out_dir);
  fs::create_directories(out);
  {
    std::ofstream o(out / "config.txt", std::ios::binary);
    o << cfg.to_text();
  }
  auto jobs = dlab::suite_jobs(sub, cfg);
  using Timed = std::pair<dlab::SuiteResult, double>;
  auto timed = [](const std::function<dlab::SuiteResult()>& job) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = job();
    return Timed{std::move(r), dlab::seconds_since(t0)};
  };
  bool ok = true;
  if (parallel) {
    std::vector<std::future<Timed>> fut;
    for (const auto& j : jobs) fut.push_back(std::async(std::launch::async, timed, j));
    for (auto& f : fut) {
      auto [r, s] = f.get();
      emit(r, out, s);
      ok = ok && r.pass();
    }
  } else {
    for (const auto& j : jobs) {
      auto [r, s] = timed(j);
      emit(r, out, s);
      ok = ok && r.pass();
    }
  }
  std::printf("%s %s\n", ok ? "PASS" : "FAIL", sub.c_str());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for the distortion construction on the interval"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "key=value config file");
  app.add_option("--out", f.out, "output directory for CSV reports");
  app.add_option("--variant", f.variant, "ell sequence variant: sec2 or sec3");
  app.add_option("--i", f.i, "even block indices for identity, supports and words");
  app.add_option("--alpha", f.alpha, "Hoelder exponents (holder, kopell)");
  app.add_option("--nmax", f.nmax, "upper n (kopell, lengths, estimates)");
  auto* seed = app.add_option("--seed", f.seed, "PRNG seed");
  app.add_option("--set", f.sets, "override a config key: key=value")->take_all();
  app.add_flag("--parallel", f.parallel, "run suites concurrently");

  const char* help[] = {"word identities, h_{n/2}, commutator time law",
                        "support claims of the conjugated words",
                        "Hoelder quotients of the pasted maps and the C1 echo",
                        "word lengths and distortion ratios",
                        "undistortion witness for f g",
                        "gap asymptotics and derivative estimates",
                        "growth bound for flows of cell fields",
                        "appendix counterexample",
                        "identity words, serialization and evaluation",
                        "every suite, both variants"};
  const auto& subs = dlab::subcommands();
  for (std::size_t k = 0; k < subs.size(); ++k) app.add_subcommand(subs[k], help[k]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  f.have_seed = seed->count() > 0;
  std::string sub = app.get_subcommands().front()->get_name();

  dlab::RunConfig cfg;
  try {
    cfg = make_config(sub, f);
  } catch (const dlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  try {
    return run(sub, cfg, f.parallel);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
