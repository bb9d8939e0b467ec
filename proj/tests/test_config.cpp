#include <gtest/gtest.h>

#include <sstream>

#include "svsdna/svs_engine.hpp"

using namespace svsdna;

TEST(KeyValues, ParsesCommentsAndWhitespace) {
  std::istringstream in("# header\n ne = 5 \n\nseed=9 # trailing\n");
  const auto kv = parse_key_values(in);
  EXPECT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("ne"), "5");
  EXPECT_EQ(kv.at("seed"), "9");
}

TEST(KeyValues, MalformedLineNamesSource) {
  std::istringstream in("ne=5\nbogus\n");
  try {
    parse_key_values(in, "c.cfg");
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("c.cfg:2"), std::string::npos);
  }
}

TEST(KeyValues, NumberParsing) {
  EXPECT_DOUBLE_EQ(parse_double("k", "0.25"), 0.25);
  EXPECT_THROW(parse_double("k", "0.25x"), ConfigError);
  EXPECT_THROW(parse_double("k", ""), ConfigError);
  EXPECT_EQ(parse_long("k", "-3"), -3);
  EXPECT_THROW(parse_long("k", "3.5"), ConfigError);
  EXPECT_TRUE(parse_bool("k", "yes"));
  EXPECT_FALSE(parse_bool("k", "0"));
  EXPECT_THROW(parse_bool("k", "maybe"), ConfigError);
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.17, 3.77e-4, 63.72, 1.0 / 3.0, 1e-300, 2.0}) {
    const auto s = format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(SvsOverrides, AppliesAndValidates) {
  const auto p = apply_svs_overrides(SvsParams{}, {{"ne", "3"},
                                                   {"seed", "42"},
                                                   {"run_mode", "suffix"},
                                                   {"screen.selection", "tm_window"},
                                                   {"tm.na_conc", "0.1"},
                                                   {"acceptance", "fitness"}});
  EXPECT_EQ(p.ne, 3);
  EXPECT_EQ(p.seed, 42u);
  EXPECT_EQ(p.constraints.similarity.run_mode, RunMode::Suffix);
  EXPECT_EQ(p.screen.selection, Selection::TmWindow);
  EXPECT_DOUBLE_EQ(p.tm_model.na_conc, 0.1);
  EXPECT_EQ(p.acceptance, Acceptance::Fitness);
  EXPECT_THROW(apply_svs_overrides(SvsParams{}, {{"num_virus", "301"}}), ConfigError);
  EXPECT_THROW(apply_svs_overrides(SvsParams{}, {{"w1", "0.7"}}), ConfigError);
  EXPECT_THROW(apply_svs_overrides(SvsParams{}, {{"run_mode", "sideways"}}), ConfigError);
  EXPECT_THROW(apply_svs_overrides(SvsParams{}, {{"tm.bogus", "1"}}), ConfigError);
}

TEST(SvsOverrides, DescribeRoundTrips) {
  SvsParams p;
  p.ne = 7;
  p.spread_radius = 2.5;
  p.constraints.hairpin.mode = HairpinMode::Literal;
  p.tm_model.strand_conc = 1e-6;
  const auto kv = describe(p);
  EXPECT_EQ(describe(apply_svs_overrides(SvsParams{}, kv)), kv);
  for (const auto& k : svs_keys()) EXPECT_TRUE(kv.count(k)) << k;
}

TEST(TmOverrides, StackSetsComplement) {
  const auto m = apply_tm_overrides(TmModel::unified(), {{"stack.AC", "-1 -2"}});
  EXPECT_EQ(m.stack(Base::A, Base::C), (Thermo{-1, -2}));
  EXPECT_EQ(m.stack(Base::G, Base::T), (Thermo{-1, -2}));
  EXPECT_THROW(apply_tm_overrides(TmModel::unified(), {{"stack.AX", "1 2"}}), ConfigError);
  EXPECT_THROW(apply_tm_overrides(TmModel::unified(), {{"stack.AC", "1"}}), ConfigError);
  EXPECT_THROW(apply_tm_overrides(TmModel::unified(), {{"strand_conc", "0"}}), ConfigError);
}
