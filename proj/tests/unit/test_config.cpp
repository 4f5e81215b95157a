#include <gtest/gtest.h>

#include <dlab/config.hpp>
#include <dlab/csv.hpp>

using namespace dlab;

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(RunConfig{}.validate()); }

TEST(Config, ParsesKeysCommentsAndLists) {
  auto c = RunConfig::from_text(
      "# comment\n"
      "ell.variant = sec3\n"
      "seed = 0x2A   \n"
      "\n"
      "identity.i = 2, 4, 6\n"
      "kopell.alphas = 0.2,0.3\n"
      "lengths.n_max = 1e6\n"
      "chart.delta = 0.45\n");
  EXPECT_EQ(c.variant, Variant::sec3);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.identity_i, (std::vector<int>{2, 4, 6}));
  EXPECT_EQ(c.kopell_alphas, (std::vector<double>{0.2, 0.3}));
  EXPECT_EQ(c.lengths_n_max, 1000000u);
  EXPECT_EQ(c.chart.delta, 0.45);
}

TEST(Config, UnknownKeyRejected) {
  RunConfig c;
  EXPECT_THROW(c.set("no.such.key", "1"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("seed = 1\nbogus = 2\n"), ConfigError);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    RunConfig::from_text("seed = 1\n\nidentity.grid = many\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
  }
  EXPECT_THROW(RunConfig::from_text("seed 1\n"), ConfigError);
}

TEST(Config, BadValuesRejected) {
  RunConfig c;
  EXPECT_THROW(c.set("identity.grid", "-5"), ConfigError);
  EXPECT_THROW(c.set("identity.grid", "2.5"), ConfigError);
  EXPECT_THROW(c.set("identity.tol", "abc"), ConfigError);
  EXPECT_THROW(c.set("ell.variant", "sec9"), ConfigError);
}

TEST(Config, ValidationCatchesNonsense) {
  RunConfig c;
  c.identity_tol = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.identity_i = {3};
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.gap_n_lo = 1e7;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.chart.delta = 0.7;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, TextRoundTrip) {
  RunConfig c;
  c.set("ell.variant", "sec3");
  c.set("seed", "12345");
  c.set("holder.alphas.sec3", "0.6,0.8");
  c.set("tsuboi.slack", "0.002");
  auto back = RunConfig::from_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.seed, 12345u);
  EXPECT_EQ(back.alphas_sec3, (std::vector<double>{0.6, 0.8}));
}

TEST(Csv, DeterministicFormatting) {
  Csv a({"n", "x", "ok", "name"}), b({"n", "x", "ok", "name"});
  a.row(3, 0.1, true, std::string("plain"));
  b.row(3, 0.1, true, std::string("plain"));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), "n,x,ok,name\n3,0.1,1,plain\n");
}

TEST(Csv, QuotesSpecialCells) {
  Csv t({"a"});
  t.row(std::string("x,y"));
  t.row(std::string("say \"hi\""));
  EXPECT_EQ(t.str(), "a\n\"x,y\"\n\"say \"\"hi\"\"\"\n");
}

TEST(Csv, RowWidthChecked) {
  Csv t({"a", "b"});
  EXPECT_THROW(t.row(1), std::invalid_argument);
}
