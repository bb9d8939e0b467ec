#pragma once

// Set and per-sequence constraint evaluators: Similarity, H-measure, GC
// content, Continuity, Hairpin, Self-Dimer.
//
// Pairwise alignment scores work on 64-bit match masks: bit i of M(s) is set
// when x_i matches y_{i-s}. Sequences are therefore limited to 64 bases.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "svsdna/sequence.hpp"
#include "svsdna/thermo.hpp"

namespace svsdna {

inline constexpr std::size_t kMaxPackedLength = 64;

/// How matched runs feed the continuity term of Similarity / H-measure.
/// Start: a run is counted once with its full length. Suffix: every suffix
/// of a run is counted.
enum class RunMode { Start, Suffix };

/// Shift: y slides past x with gap padding. Concat: x slides along y, a
/// block of g gaps, and y again, for every g in [0, len(y) - 1].
enum class Alignment { Shift, Concat };

enum class RowAggregate { Sum, Max };

/// Mirrored pairs stem positions around the ring; Literal uses the printed
/// (i + j, n - j) indices.
enum class HairpinMode { Mirrored, Literal };

struct SimilarityParams {
  double ds = 0.17;
  int cs = 6;
  double dh = 0.17;
  int ch = 6;
  RunMode run_mode = RunMode::Start;
  Alignment alignment = Alignment::Concat;
};

struct HairpinParams {
  int r_min = 6;
  int p_min = 6;
  HairpinMode mode = HairpinMode::Mirrored;
};

struct ConstraintParams {
  SimilarityParams similarity{};
  HairpinParams hairpin{};
  int continuity_threshold = 2;
  RowAggregate row_aggregate = RowAggregate::Sum;
  /// Adds H(X_i, X_i) to each H-measure row.
  bool h_include_self = true;

  void validate() const {
    auto frac = [](double v, const char* k) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(k) + " must be in [0,1]");
    };
    frac(similarity.ds, "ds");
    frac(similarity.dh, "dh");
    if (similarity.cs < 1 || similarity.ch < 1) throw ConfigError("cs and ch must be >= 1");
    if (hairpin.r_min < 1 || hairpin.p_min < 1) throw ConfigError("r_min and p_min must be >= 1");
    if (continuity_threshold < 1) throw ConfigError("continuity_threshold must be >= 1");
  }
};

/// Two bit planes per strand (base = 2 * hi + lo), for the sequence and its
/// reversal. Complementing a base flips both planes.
struct PackedSequence {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t rev_lo = 0;
  std::uint64_t rev_hi = 0;
  int n = 0;

  explicit PackedSequence(const DnaSequence& s) : n(static_cast<int>(s.size())) {
    if (s.size() > kMaxPackedLength)
      throw DomainError("sequences longer than 64 bases are not supported (got " + std::to_string(s.size()) + ")");
    for (int i = 0; i < n; ++i) {
      const auto f = static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]);
      const auto r = static_cast<std::uint64_t>(s[static_cast<std::size_t>(n - 1 - i)]);
      lo |= (f & 1) << i;
      hi |= (f >> 1) << i;
      rev_lo |= (r & 1) << i;
      rev_hi |= (r >> 1) << i;
    }
  }
};

namespace detail {

inline std::uint64_t shifted(std::uint64_t m, int s) {
  if (s >= 64 || s <= -64) return 0;
  return s >= 0 ? m << s : m >> -s;
}

/// Bits [lo, hi) set.
inline std::uint64_t bit_range(int lo, int hi) {
  if (hi <= lo) return 0;
  const std::uint64_t upper = hi >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << hi) - 1;
  return upper & ~((std::uint64_t{1} << lo) - 1);
}

/// Continuity part of a single alignment score.
inline long run_score(std::uint64_t mask, int cs, RunMode mode) {
  std::uint64_t probe = mask;
  for (int t = 1; t <= cs && probe; ++t) probe &= mask >> t;
  if (!probe) return 0;  // no run longer than cs
  long total = 0;
  while (mask) {
    const int start = std::countr_zero(mask);
    const int len = std::countr_one(mask >> start);
    if (mode == RunMode::Start) {
      if (len > cs) total += len;
    } else {
      for (int l = len; l > cs; --l) total += l;
    }
    mask = len >= 64 ? 0 : mask & ~(((std::uint64_t{1} << len) - 1) << start);
  }
  return total;
}

inline long alignment_score(std::uint64_t mask, double threshold, int cs, RunMode mode) {
  const int c = std::popcount(mask);
  return (c > threshold ? c : 0) + run_score(mask, cs, mode);
}

/// Max alignment score of x against y, both given as bit planes. For
/// complement matching x_i pairs with the complement of y_j.
inline long best_alignment(std::uint64_t x_lo, std::uint64_t x_hi, int n, std::uint64_t y_lo, std::uint64_t y_hi,
                           int m, bool complement_match, double frac, int cs, RunMode mode, Alignment alignment) {
  // Single-copy shifts s lie in (-m, n); stored at index s + m - 1.
  std::array<std::uint64_t, 2 * kMaxPackedLength> masks{};
  std::array<int, 2 * kMaxPackedLength> counts{};
  for (int s = -(m - 1); s <= n - 1; ++s) {
    const std::uint64_t d_lo = x_lo ^ shifted(y_lo, s);
    const std::uint64_t d_hi = x_hi ^ shifted(y_hi, s);
    const std::uint64_t hit = complement_match ? (d_lo & d_hi) : ~(d_lo | d_hi);
    const std::uint64_t acc = hit & bit_range(std::max(0, s), std::min(n, m + s));
    masks[static_cast<std::size_t>(s + m - 1)] = acc;
    counts[static_cast<std::size_t>(s + m - 1)] = std::popcount(acc);
  }
  auto at = [m](int s) { return static_cast<std::size_t>(s + m - 1); };
  const double threshold = frac * n;
  long best = 0;
  // Upper bound from the match count alone; the run term needs a run longer
  // than cs, so short masks score at most c.
  auto bound = [cs, mode](long c) {
    if (c <= cs) return c;
    return mode == RunMode::Start ? 2 * c : c + c * (c + 1) / 2;
  };
  auto consider = [&](std::uint64_t mask, int c) {
    if (bound(c) <= best) return;
    best = std::max(best, alignment_score(mask, threshold, cs, mode));
  };
  auto singles = [&](int lo, int hi) {
    for (int s = std::max(lo, -(m - 1)); s <= std::min(hi, n - 1); ++s) consider(masks[at(s)], counts[at(s)]);
  };
  if (alignment == Alignment::Shift) {
    singles(-n, n);
    return best;
  }
  // Windows over y, g gaps, y for shifts k in [-n, n]. Shift k reads the
  // first copy at s = k and the second at s = k + m + g.
  singles(std::max({-n, -(m - 1), n - 2 * m + 1}), n - 1);  // first copy only
  if (m <= n) singles(std::max(m - n, -(m - 1)), m - 1);   // second copy only
  // Straddling windows pair k with s2 in [k + m, k + 2m - 1]; a suffix max of
  // the counts bounds a whole row at once.
  std::array<int, 2 * kMaxPackedLength + 1> suffix_max{};
  for (int s = n - 1; s >= -(m - 1); --s) suffix_max[at(s)] = std::max(counts[at(s)], suffix_max[at(s) + 1]);
  const int k_lo = std::max(-n, -(m - 1));
  const int k_hi = std::min(n, n - 1 - m);
  for (int k = k_lo; k <= k_hi; ++k) {
    const int s_lo = k + m;
    const int s_hi = std::min(n - 1, k + 2 * m - 1);
    if (s_lo > s_hi || bound(counts[at(k)] + suffix_max[at(s_lo)]) <= best) continue;
    for (int s2 = s_lo; s2 <= s_hi; ++s2) consider(masks[at(k)] | masks[at(s2)], counts[at(k)] + counts[at(s2)]);
  }
  return best;
}

}  // namespace detail

inline long similarity_pair(const PackedSequence& x, const PackedSequence& y, const SimilarityParams& p = {}) {
  return detail::best_alignment(x.lo, x.hi, x.n, y.lo, y.hi, y.n, false, p.ds, p.cs, p.run_mode, p.alignment);
}

/// x against the reversal of y, counting complementary positions.
inline long h_measure_pair(const PackedSequence& x, const PackedSequence& y, const SimilarityParams& p = {}) {
  return detail::best_alignment(x.lo, x.hi, x.n, y.rev_lo, y.rev_hi, y.n, true, p.dh, p.ch, p.run_mode, p.alignment);
}

inline long similarity_pair(const DnaSequence& x, const DnaSequence& y, const SimilarityParams& p = {}) {
  return similarity_pair(PackedSequence(x), PackedSequence(y), p);
}

inline long h_measure_pair(const DnaSequence& x, const DnaSequence& y, const SimilarityParams& p = {}) {
  return h_measure_pair(PackedSequence(x), PackedSequence(y), p);
}

struct SetTotals {
  std::vector<long> per_sequence;
  long total = 0;
};

namespace detail {

template <class PairFn>
SetTotals aggregate_rows(std::span<const DnaSequence> set, RowAggregate agg, bool include_self, PairFn pair) {
  if (set.size() < 2) throw DomainError("set-relative measures need at least 2 sequences");
  std::vector<PackedSequence> packed;
  packed.reserve(set.size());
  for (const auto& s : set) packed.emplace_back(s);
  SetTotals out;
  out.per_sequence.assign(set.size(), 0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    long row = 0;
    for (std::size_t j = 0; j < set.size(); ++j) {
      if (i == j && !include_self) continue;
      const long v = pair(packed[i], packed[j]);
      row = agg == RowAggregate::Sum ? row + v : std::max(row, v);
    }
    out.per_sequence[i] = row;
    out.total += row;
  }
  return out;
}

}  // namespace detail

inline SetTotals similarity_total(std::span<const DnaSequence> set, const ConstraintParams& p = {}) {
  return detail::aggregate_rows(set, p.row_aggregate, false, [&](const auto& x, const auto& y) {
    return similarity_pair(x, y, p.similarity);
  });
}

inline SetTotals h_measure_total(std::span<const DnaSequence> set, const ConstraintParams& p = {}) {
  return detail::aggregate_rows(set, p.row_aggregate, p.h_include_self, [&](const auto& x, const auto& y) {
    return h_measure_pair(x, y, p.similarity);
  });
}

inline double gc_content(const DnaSequence& s) {
  const auto gc = std::count_if(s.begin(), s.end(), [](Base b) { return b == Base::G || b == Base::C; });
  return static_cast<double>(gc) / static_cast<double>(s.size());
}

/// Sum of squared lengths of runs longer than `threshold`.
inline long continuity(const DnaSequence& s, int threshold = 2) {
  long total = 0;
  for (const auto& r : runs(s)) {
    const long len = static_cast<long>(r.length);
    if (len > threshold) total += len * len;
  }
  return total;
}

/// 1-based positions paired at step j of the (p, r, i) hairpin candidate.
inline std::pair<long, long> hairpin_positions(HairpinMode mode, long n, long p, long r, long i, long j) {
  if (mode == HairpinMode::Literal) return {i + j, n - j};
  return {i + p - j, i + p + r + j - 1};
}

inline long hairpin(const DnaSequence& s, const HairpinParams& hp = {}) {
  const long n = static_cast<long>(s.size());
  long total = 0;
  for (long p = hp.p_min; p <= (n - hp.r_min) / 2; ++p) {
    for (long r = hp.r_min; r <= n - 2 * p; ++r) {
      for (long i = 1; i <= n - 2 * p - r; ++i) {
        const long pri = std::min(p + i, n - p - i - r);
        long count = 0;
        for (long j = 1; j <= pri; ++j) {
          const auto [a, b] = hairpin_positions(hp.mode, n, p, r, i, j);
          if (a < 1 || a > n || b < 1 || b > n) continue;
          if (s[static_cast<std::size_t>(a - 1)] == complement(s[static_cast<std::size_t>(b - 1)])) ++count;
        }
        if (2 * count > pri) total += count;
      }
    }
  }
  return total;
}

/// Best count of matching positions between s and its shifted reverse
/// complement, over all partial overlaps.
inline long self_dimer(const DnaSequence& s) {
  const PackedSequence x(s);
  const PackedSequence y(reverse_complement(s));
  long best = 0;
  for (int k = -(x.n - 1); k <= x.n - 1; ++k) {
    const std::uint64_t diff = (x.lo ^ detail::shifted(y.lo, k)) | (x.hi ^ detail::shifted(y.hi, k));
    const std::uint64_t same = ~diff & detail::bit_range(std::max(0, k), std::min(x.n, x.n + k));
    best = std::max<long>(best, std::popcount(same));
  }
  return best;
}

/// Reads keys ds, cs, dh, ch, run_mode, alignment, row_aggregate,
/// h_include_self, hairpin_mode, r_min, p_min, continuity_threshold.
/// Unknown keys are left for other consumers.
inline ConstraintParams apply_constraint_overrides(ConstraintParams p, const KeyValues& kv) {
  auto get = [&kv](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto pick = [](const char* key, const std::string& v, std::initializer_list<const char*> names) {
    int idx = 0;
    for (const char* name : names) {
      if (v == name) return idx;
      ++idx;
    }
    std::string msg = std::string(key) + " must be one of:";
    for (const char* name : names) msg += std::string(" ") + name;
    throw ConfigError(msg);
  };
  if (auto v = get("ds")) p.similarity.ds = parse_double("ds", *v);
  if (auto v = get("dh")) p.similarity.dh = parse_double("dh", *v);
  if (auto v = get("cs")) p.similarity.cs = static_cast<int>(parse_long("cs", *v));
  if (auto v = get("ch")) p.similarity.ch = static_cast<int>(parse_long("ch", *v));
  if (auto v = get("run_mode")) p.similarity.run_mode = static_cast<RunMode>(pick("run_mode", *v, {"start", "suffix"}));
  if (auto v = get("alignment"))
    p.similarity.alignment = static_cast<Alignment>(pick("alignment", *v, {"shift", "concat"}));
  if (auto v = get("row_aggregate"))
    p.row_aggregate = static_cast<RowAggregate>(pick("row_aggregate", *v, {"sum", "max"}));
  if (auto v = get("h_include_self")) p.h_include_self = parse_bool("h_include_self", *v);
  if (auto v = get("hairpin_mode"))
    p.hairpin.mode = static_cast<HairpinMode>(pick("hairpin_mode", *v, {"mirrored", "literal"}));
  if (auto v = get("r_min")) p.hairpin.r_min = static_cast<int>(parse_long("r_min", *v));
  if (auto v = get("p_min")) p.hairpin.p_min = static_cast<int>(parse_long("p_min", *v));
  if (auto v = get("continuity_threshold"))
    p.continuity_threshold = static_cast<int>(parse_long("continuity_threshold", *v));
  p.validate();
  return p;
}

inline KeyValues describe(const ConstraintParams& p) {
  KeyValues kv;
  kv["ds"] = format_double(p.similarity.ds);
  kv["dh"] = format_double(p.similarity.dh);
  kv["cs"] = std::to_string(p.similarity.cs);
  kv["ch"] = std::to_string(p.similarity.ch);
  kv["run_mode"] = p.similarity.run_mode == RunMode::Start ? "start" : "suffix";
  kv["alignment"] = p.similarity.alignment == Alignment::Concat ? "concat" : "shift";
  kv["row_aggregate"] = p.row_aggregate == RowAggregate::Sum ? "sum" : "max";
  kv["h_include_self"] = p.h_include_self ? "true" : "false";
  kv["hairpin_mode"] = p.hairpin.mode == HairpinMode::Mirrored ? "mirrored" : "literal";
  kv["r_min"] = std::to_string(p.hairpin.r_min);
  kv["p_min"] = std::to_string(p.hairpin.p_min);
  kv["continuity_threshold"] = std::to_string(p.continuity_threshold);
  return kv;
}

struct ConstraintProfile {
  long similarity = 0;
  long h_measure = 0;
  long continuity = 0;
  long hairpin = 0;
  double gc = 0.0;
  double tm = 0.0;
  long self_dimer = 0;
};

inline std::vector<ConstraintProfile> profile_set(std::span<const DnaSequence> set, const ConstraintParams& p = {},
                                                  const TmModel& model = TmModel::unified()) {
  const auto sim = similarity_total(set, p);
  const auto h = h_measure_total(set, p);
  std::vector<ConstraintProfile> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto& row = out[i];
    row.similarity = sim.per_sequence[i];
    row.h_measure = h.per_sequence[i];
    row.continuity = continuity(set[i], p.continuity_threshold);
    row.hairpin = hairpin(set[i], p.hairpin);
    row.gc = gc_content(set[i]);
    row.tm = melting_temperature(set[i], model);
    row.self_dimer = self_dimer(set[i]);
  }
  return out;
}

}  // namespace svsdna
