#pragma once

// Published per-sequence rows shipped under tests/fixtures, one TSV per method.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "svsdna/sequence.hpp"

namespace fixtures {

inline std::string path(const std::string& name) { return std::string(SVSDNA_FIXTURE_DIR) + "/" + name; }

struct TableRow {
  std::string name;
  svsdna::DnaSequence sequence;
  long similarity;
  long h_measure;
  long continuity;
  long hairpin;
  double gc;
  double tm;
};

inline std::vector<TableRow> table(const std::string& method) {
  std::ifstream in(path(method + "_table.tsv"));
  if (!in) throw std::runtime_error("missing fixture " + method);
  std::vector<TableRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string name, seq;
    long sim, h, cont, hp;
    double gc, tm;
    is >> name >> seq >> sim >> h >> cont >> hp >> gc >> tm;
    rows.push_back({name, svsdna::parse_sequence(seq), sim, h, cont, hp, gc, tm});
  }
  return rows;
}

inline std::vector<svsdna::DnaSequence> sequences(const std::vector<TableRow>& rows) {
  std::vector<svsdna::DnaSequence> out;
  for (const auto& r : rows) out.push_back(r.sequence);
  return out;
}

}  // namespace fixtures
