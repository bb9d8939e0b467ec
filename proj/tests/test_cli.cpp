#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "svsdna/cli.hpp"

using namespace svsdna;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

const std::vector<std::string> kSmallDesign = {"--set", "num_host=80",      "--set", "num_virus=8",
                                               "--set", "t_max=6",          "--set", "lm=10",
                                               "--set", "ln=10",            "--set", "screen.min_out=2",
                                               "--set", "screen.max_out=3", "--set", "ne=5"};

std::vector<std::string> design_args(const std::string& out, const std::string& seed) {
  std::vector<std::string> a{"--mode", "design", "--seed", seed, "--format", "csv", "--output", out};
  a.insert(a.end(), kSmallDesign.begin(), kSmallDesign.end());
  return a;
}

}  // namespace

TEST(Cli, EvaluateCsvColumnsAndTotals) {
  const auto r = invoke({"--mode", "evaluate", "--input", fixtures::path("svs.fasta"), "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# format_version=1\n", 0), 0u);
  EXPECT_NE(r.out.find("# seed=1\n"), std::string::npos);
  EXPECT_NE(r.out.find("# config.alignment=concat\n"), std::string::npos);
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[0], "name,sequence,similarity,h_measure,continuity,hairpin,gc,tm,self_dimer");
  const auto first = split(lines[1], ',');
  EXPECT_EQ(first[0], "S1");
  EXPECT_EQ(first[1], "GAGTAGCTCTGCATAAGC");
  EXPECT_EQ(first[4], "0");
  EXPECT_EQ(first[5], "0");
  EXPECT_EQ(first[6], "0.5");

  const auto prof = profile_set(fixtures::sequences(fixtures::table("svs")));
  long sim = 0, h = 0;
  for (const auto& p : prof) {
    sim += p.similarity;
    h += p.h_measure;
  }
  const auto total = split(lines[8], ',');
  EXPECT_EQ(total[0], "total");
  EXPECT_EQ(total[2], std::to_string(sim));
  EXPECT_EQ(total[3], std::to_string(h));
}

TEST(Cli, EvaluateNacstContinuity) {
  const auto r = invoke({"--mode", "evaluate", "--input", fixtures::path("nacst.fasta"), "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(split(data_lines(r.out)[7], ',')[4], "9");
}

TEST(Cli, CsvAndJsonAgree) {
  const auto csv = invoke({"--mode", "evaluate", "--input", fixtures::path("dmea.fasta"), "--format", "csv"});
  const auto json = invoke({"--mode", "evaluate", "--input", fixtures::path("dmea.fasta"), "--format", "json"});
  ASSERT_EQ(csv.code, 0);
  ASSERT_EQ(json.code, 0);
  const auto j = nlohmann::json::parse(json.out);
  const auto lines = data_lines(csv.out);
  const auto header = split(lines[0], ',');
  ASSERT_EQ(j["rows"].size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    const auto cells = split(lines[i + 1], ',');
    const auto& row = j["rows"][i];
    EXPECT_EQ(row["name"].get<std::string>(), cells[0]);
    EXPECT_EQ(row["sequence"].get<std::string>(), cells[1]);
    for (std::size_t c = 2; c < header.size(); ++c)
      EXPECT_EQ(row[header[c]].get<double>(), std::strtod(cells[c].c_str(), nullptr)) << header[c];
  }
  EXPECT_EQ(j["metadata"]["seed"], "1");
  EXPECT_EQ(j["metadata"]["format_version"], "1");
}

TEST(Cli, TableFormatRenders) {
  const auto r = invoke({"--mode", "evaluate", "--input", fixtures::path("svs.fasta")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("GAGTAGCTCTGCATAAGC"), std::string::npos);
  EXPECT_NE(r.out.find("total"), std::string::npos);
}

TEST(Cli, EvaluateErrors) {
  auto r = invoke({"--mode", "evaluate", "--input", fixtures::path("empty.txt")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("parse error"), std::string::npos);

  const std::string single = testing::TempDir() + "/single.txt";
  { std::ofstream(single) << "ACGTACGT\n"; }
  r = invoke({"--mode", "evaluate", "--input", single});
  EXPECT_EQ(r.code, 1);

  const std::string bad = testing::TempDir() + "/bad.txt";
  { std::ofstream(bad) << "ACGT\nACGN\n"; }
  r = invoke({"--mode", "evaluate", "--input", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bad.txt:2"), std::string::npos);

  EXPECT_EQ(invoke({"--mode", "evaluate"}).code, 2);
  EXPECT_EQ(invoke({"--mode", "nonsense"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, ConfigResolutionOrder) {
  const std::string cfg = testing::TempDir() + "/run.cfg";
  { std::ofstream(cfg) << "seed = 4\nds = 0.2\nrun_mode = suffix\n"; }
  auto r = invoke({"--mode", "evaluate", "--input", fixtures::path("svs.fasta"), "--format", "csv", "--config", cfg,
                "--set", "ds=0.25", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# seed=9\n"), std::string::npos);
  EXPECT_NE(r.out.find("# config.ds=0.25\n"), std::string::npos);
  EXPECT_NE(r.out.find("# config.run_mode=suffix\n"), std::string::npos);

  r = invoke({"--mode", "evaluate", "--input", fixtures::path("svs.fasta"), "--set", "no_such_key=1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no_such_key"), std::string::npos);
  EXPECT_EQ(invoke({"--mode", "evaluate", "--input", fixtures::path("svs.fasta"), "--set", "ds"}).code, 2);
  EXPECT_EQ(invoke({"--mode", "evaluate", "--input", fixtures::path("svs.fasta"), "--config", "/nonexistent"}).code, 2);
}

TEST(Cli, StatsValuesMode) {
  const auto r = invoke({"--mode", "stats", "--values", "--format", "csv", "--input",
                      "SVS=" + fixtures::path("svs_tm.txt"), "--input", "HSWOA=" + fixtures::path("hswoa_tm.txt"),
                      "--input", "NACST=" + fixtures::path("nacst_tm.txt"), "--input",
                      "DMEA=" + fixtures::path("dmea_tm.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 5u);
  const std::vector<std::pair<std::string, double>> expected{
      {"SVS", 0.68}, {"HSWOA", 1.86}, {"NACST", 4.33}, {"DMEA", 0.77}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto cells = split(lines[i + 1], ',');
    EXPECT_EQ(cells[0], expected[i].first);
    EXPECT_NEAR(std::strtod(cells[3].c_str(), nullptr), expected[i].second, 0.005) << cells[0];
  }
  EXPECT_NE(r.out.find("# variance_order=SVS < DMEA < HSWOA < NACST"), std::string::npos);
}

TEST(Cli, StatsSequencesMode) {
  const std::string same = testing::TempDir() + "/same.txt";
  { std::ofstream(same) << "ACGTTGCAACGTTGCA\nACGTTGCAACGTTGCA\nACGTTGCAACGTTGCA\n"; }
  const auto r = invoke({"--mode", "stats", "--format", "json", "--input", same, "--input", fixtures::path("svs.fasta")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["sets"][0]["label"], "same");
  EXPECT_DOUBLE_EQ(j["sets"][0]["variance"].get<double>(), 0.0);
  EXPECT_EQ(j["variance_order"][0], "same");
  EXPECT_EQ(invoke({"--mode", "stats"}).code, 2);
}

TEST(Cli, DesignIsByteDeterministic) {
  const std::string a = testing::TempDir() + "/design_a";
  const std::string b = testing::TempDir() + "/design_b";
  const auto ra = invoke(design_args(a, "3"));
  const auto rb = invoke(design_args(b, "3"));
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(rb.code, 0) << rb.err;
  for (const char* ext : {".fasta", ".history.csv", ".profile.csv"}) {
    ASSERT_TRUE(std::filesystem::exists(a + ext)) << ext;
    EXPECT_EQ(slurp(a + ext), slurp(b + ext)) << ext;
  }
  const auto history = data_lines(slurp(a + ".history.csv"));
  EXPECT_EQ(history[0], "step,susceptible,infected_I,infected_II,immune,dead,library_size,best_g");
  EXPECT_GE(history.size(), 2u);
  EXPECT_NE(slurp(a + ".fasta").find("# seed=3\n"), std::string::npos);
}

TEST(Cli, DesignShortfallExitsNonzero) {
  auto args = design_args(testing::TempDir() + "/design_short", "3");
  args.insert(args.end(), {"--set", "screen.tm_min=95", "--set", "screen.tm_max=99"});
  const auto r = invoke(args);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("shortfall"), std::string::npos);
}

TEST(Cli, OracleCheck) {
  const auto r = invoke({"--mode", "oracle-check", "--set", "oracle.pairs=20", "--seed", "5"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("0 mismatches"), std::string::npos);
  EXPECT_EQ(invoke({"--mode", "oracle-check", "--set", "oracle.pairs=0"}).code, 2);
}
