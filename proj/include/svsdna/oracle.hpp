#pragma once

// Slow reference implementations for cross-checking the fast evaluators.
// Everything here works on plain character strings with '-' for gaps and
// deliberately shares no alignment code with constraints.hpp.

#include <algorithm>
#include <limits>
#include <optional>
#include <utility>
#include <sstream>
#include <string>
#include <vector>

#include "svsdna/constraints.hpp"
#include "svsdna/sequence.hpp"
#include "svsdna/svs_engine.hpp"

namespace svsdna::oracle {

inline constexpr char kGap = '-';

inline char complement_char(char c) {
  switch (c) {
    case 'A': return 'T';
    case 'T': return 'A';
    case 'C': return 'G';
    case 'G': return 'C';
    default: return '?';
  }
}

/// Score of one alignment given as equal-length symbol strings.
inline long score_alignment(const std::string& top, const std::string& bottom, bool complementary, double threshold,
                            int cs, RunMode mode) {
  std::vector<bool> hit(top.size(), false);
  long count = 0;
  for (std::size_t i = 0; i < top.size(); ++i) {
    const char a = top[i], b = bottom[i];
    if (a == kGap || b == kGap) continue;
    hit[i] = complementary ? complement_char(a) == b : a == b;
    count += hit[i];
  }
  long total = count > threshold ? count : 0;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (!hit[i]) continue;
    const bool starts = i == 0 || !hit[i - 1];
    if (mode == RunMode::Start && !starts) continue;
    long len = 0;
    while (i + len < hit.size() && hit[i + len]) ++len;
    if (len > cs) total += len;
  }
  return total;
}

/// All alignments x is scored against: the literal target string and
/// shift k in [-n, n] placing x_i over target_{i-k}.
inline std::vector<std::string> alignment_rows(const std::string& x, const std::string& y, Alignment alignment) {
  std::vector<std::string> targets;
  if (alignment == Alignment::Shift) {
    targets.push_back(y);
  } else {
    for (std::size_t g = 0; g < y.size(); ++g) targets.push_back(y + std::string(g, kGap) + y);
  }
  const long n = static_cast<long>(x.size());
  std::vector<std::string> rows;
  for (const auto& z : targets) {
    for (long k = -n; k <= n; ++k) {
      std::string row;
      for (long i = 0; i < n; ++i) {
        const long j = i - k;
        row += (j >= 0 && j < static_cast<long>(z.size())) ? z[static_cast<std::size_t>(j)] : kGap;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline long naive_similarity_pair(const DnaSequence& x, const DnaSequence& y, const SimilarityParams& p = {}) {
  const std::string xs = x.str();
  long best = 0;
  for (const auto& row : alignment_rows(xs, y.str(), p.alignment))
    best = std::max(best, score_alignment(xs, row, false, p.ds * static_cast<double>(xs.size()), p.cs, p.run_mode));
  return best;
}

inline long naive_h_measure_pair(const DnaSequence& x, const DnaSequence& y, const SimilarityParams& p = {}) {
  const std::string xs = x.str();
  std::string yr = y.str();
  std::reverse(yr.begin(), yr.end());
  long best = 0;
  for (const auto& row : alignment_rows(xs, yr, p.alignment))
    best = std::max(best, score_alignment(xs, row, true, p.dh * static_cast<double>(xs.size()), p.ch, p.run_mode));
  return best;
}

inline long naive_self_dimer(const DnaSequence& x) {
  const std::string s = x.str();
  std::string rc;
  for (auto it = s.rbegin(); it != s.rend(); ++it) rc += complement_char(*it);
  const long n = static_cast<long>(s.size());
  long best = 0;
  for (long k = -(n - 1); k <= n - 1; ++k) {
    long overlap = 0, ham = 0;
    for (long i = 0; i < n; ++i) {
      const long j = i - k;
      if (j < 0 || j >= n) continue;
      ++overlap;
      if (s[static_cast<std::size_t>(i)] != rc[static_cast<std::size_t>(j)]) ++ham;
    }
    best = std::max(best, overlap - ham);
  }
  return best;
}

struct HairpinTerm {
  int p = 0;
  int r = 0;
  int i = 0;
  int pairs = 0;
  int pri = 0;
  bool contributes = false;
};

/// Every (stem, ring, start) candidate with its pair count.
inline std::vector<HairpinTerm> enumerate_hairpins(const DnaSequence& x, const HairpinParams& hp = {}) {
  const std::string s = x.str();
  const int n = static_cast<int>(s.size());
  auto base_at = [&](int pos) { return (pos >= 1 && pos <= n) ? s[static_cast<std::size_t>(pos - 1)] : kGap; };
  std::vector<HairpinTerm> out;
  for (int p = hp.p_min; 2 * p + hp.r_min <= n; ++p) {
    for (int r = hp.r_min; r <= n - 2 * p; ++r) {
      for (int i = 1; i <= n - 2 * p - r; ++i) {
        HairpinTerm t{p, r, i, 0, std::min(p + i, n - p - i - r), false};
        const int ring_first = i + p;  // the ring covers ring_first .. ring_first + r - 1
        const int ring_last = ring_first + r - 1;
        for (int j = 1; j <= t.pri; ++j) {
          const bool literal = hp.mode == HairpinMode::Literal;
          const char a = literal ? base_at(i + j) : base_at(ring_first - j);
          const char b = literal ? base_at(n - j) : base_at(ring_last + j);
          if (a != kGap && b != kGap && complement_char(a) == b) ++t.pairs;
        }
        t.contributes = t.pairs > t.pri / 2.0;
        out.push_back(t);
      }
    }
  }
  return out;
}

inline long naive_hairpin(const DnaSequence& x, const HairpinParams& hp = {}) {
  long total = 0;
  for (const auto& t : enumerate_hairpins(x, hp))
    if (t.contributes) total += t.pairs;
  return total;
}

struct Mismatch {
  std::string what;
  std::string inputs;
  long fast = 0;
  long reference = 0;
};

struct OracleReport {
  std::size_t cases = 0;
  std::vector<Mismatch> mismatches;
  bool pass() const { return mismatches.empty(); }
};

inline std::string render(const OracleReport& r) {
  std::ostringstream os;
  os << "oracle-check: " << r.cases << " cases, " << r.mismatches.size() << " mismatches\n";
  for (const auto& m : r.mismatches)
    os << "  " << m.what << " " << m.inputs << ": fast " << m.fast << ", oracle " << m.reference << '\n';
  os << (r.pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

inline DnaSequence random_sequence(int n, Rng& rng) {
  std::vector<Base> b(static_cast<std::size_t>(n));
  for (auto& x : b) x = kBases[rng.below(4)];
  return DnaSequence(std::move(b));
}

/// Fast evaluators against the references on `pairs` random pairs per
/// interpretation flag combination, lengths in [min_len, max_len].
inline OracleReport run_oracle_check(std::uint64_t seed, std::size_t pairs = 200, int min_len = 8, int max_len = 30) {
  OracleReport rep;
  Rng rng(seed);
  auto check = [&rep](const char* what, const std::string& inputs, long fast, long ref) {
    ++rep.cases;
    if (fast != ref) rep.mismatches.push_back({what, inputs, fast, ref});
  };
  for (auto alignment : {Alignment::Shift, Alignment::Concat}) {
    for (auto mode : {RunMode::Start, RunMode::Suffix}) {
      SimilarityParams sp;
      sp.alignment = alignment;
      sp.run_mode = mode;
      const std::string flags = std::string(alignment == Alignment::Shift ? "shift" : "concat") + "/" +
                                (mode == RunMode::Start ? "start" : "suffix");
      for (std::size_t c = 0; c < pairs; ++c) {
        const auto x = random_sequence(rng.between(min_len, max_len), rng);
        // Some pairs are related so that long matched runs occur.
        auto y = random_sequence(rng.between(min_len, max_len), rng);
        if (c % 4 == 0) y = x;
        if (c % 4 == 1) y = reverse_complement(x);
        const std::string in = flags + " " + x.str() + " " + y.str();
        check("similarity", in, similarity_pair(x, y, sp), naive_similarity_pair(x, y, sp));
        check("h_measure", in, h_measure_pair(x, y, sp), naive_h_measure_pair(x, y, sp));
      }
    }
  }
  for (auto mode : {HairpinMode::Mirrored, HairpinMode::Literal}) {
    HairpinParams hp;
    hp.mode = mode;
    // Smaller stems and rings make contributing terms common.
    HairpinParams small = hp;
    small.p_min = 3;
    small.r_min = 3;
    for (std::size_t c = 0; c < pairs; ++c) {
      const auto x = random_sequence(rng.between(min_len, max_len), rng);
      const std::string in = std::string(mode == HairpinMode::Mirrored ? "mirrored " : "literal ") + x.str();
      check("hairpin", in, hairpin(x, hp), naive_hairpin(x, hp));
      check("hairpin(p3,r3)", in, hairpin(x, small), naive_hairpin(x, small));
    }
  }
  for (std::size_t c = 0; c < pairs; ++c) {
    const auto x = random_sequence(rng.between(min_len, max_len), rng);
    check("self_dimer", x.str(), self_dimer(x), naive_self_dimer(x));
  }
  return rep;
}

struct BaselineOptions {
  std::uint64_t budget = 0;   // G-evaluations to spend, screening included
  std::size_t pool_size = 0;  // genomes handed to the screen
};

/// Random search on the engine's objective: draw random GC-balanced genomes
/// that pass the hard filters, score each once by G against a fixed random
/// reference pool, keep the pool_size lowest, and screen them.
inline DesignResult random_search_baseline(const SvsParams& p, const BaselineOptions& opt) {
  p.validate();
  if (opt.pool_size < 2) throw DomainError("baseline pool_size must be >= 2");
  Rng rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
  auto feasible = [&] {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      auto g = random_balanced_genome(p.length, rng);
      if (screen_violation(g, p) == 0.0) return g;
    }
    throw DomainError("baseline: no random genome passes the hard filters");
  };
  std::vector<DnaSequence> reference;
  for (std::size_t i = 0; i < opt.pool_size; ++i) reference.push_back(random_balanced_genome(p.length, rng));
  const Fitness fitness(reference, p.constraints);

  const std::uint64_t draws = opt.budget > opt.pool_size ? opt.budget - opt.pool_size : opt.pool_size;
  std::vector<std::pair<long, DnaSequence>> best;  // max-heap on G
  auto worse = [](const auto& a, const auto& b) { return a.first < b.first; };
  std::uint64_t spent = 0;
  for (std::uint64_t d = 0; d < draws; ++d) {
    auto g = feasible();
    const long score = fitness(g);
    ++spent;
    if (best.size() < opt.pool_size) {
      best.emplace_back(score, std::move(g));
      std::push_heap(best.begin(), best.end(), worse);
    } else if (score < best.front().first) {
      std::pop_heap(best.begin(), best.end(), worse);
      best.back() = {score, std::move(g)};
      std::push_heap(best.begin(), best.end(), worse);
    }
  }
  std::vector<DnaSequence> lib;
  for (auto& [score, g] : best) lib.push_back(std::move(g));
  auto r = finish_design(screen_library(std::move(lib), p, &spent), p);
  r.g_evaluations = spent;
  return r;
}

}  // namespace svsdna::oracle
