// Profiles a small sequence set and prints one row per sequence.
//   demo_evaluate [file]

#include <cstdio>
#include <iostream>

#include "svsdna/constraints.hpp"
#include "svsdna/sequence.hpp"
#include "svsdna/thermo.hpp"

int main(int argc, char** argv) {
  using namespace svsdna;
  std::vector<NamedSequence> named;
  if (argc > 1) {
    named = read_sequence_file(argv[1]);
  } else {
    for (const char* s : {"GAGTAGCTCTGCATAAGC", "AATAAGAGTCGGTTCGCTCC", "ACTCTCGGCACGTATATCAG"})
      named.push_back({"S" + std::to_string(named.size() + 1), parse_sequence(s)});
  }
  const auto seqs = sequences_of(named);
  const auto prof = profile_set(seqs);
  std::printf("%-4s %-22s %4s %4s %4s %4s %5s %6s %4s\n", "name", "sequence", "sim", "h", "cont", "hp", "gc", "tm",
              "sd");
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto& p = prof[i];
    std::printf("%-4s %-22s %4ld %4ld %4ld %4ld %5.2f %6.2f %4ld\n", named[i].name.c_str(), seqs[i].str().c_str(),
                p.similarity, p.h_measure, p.continuity, p.hairpin, p.gc, p.tm, p.self_dimer);
  }
  const auto stats = tm_stats(seqs);
  std::printf("Tm mean %.2f, sample variance %.3f\n", stats.mean, stats.variance);
}
