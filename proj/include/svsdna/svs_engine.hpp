#pragma once

// Static Virus Spread: hosts sit at fixed points in an Lm x Ln field, viruses
// carry DNA genomes, and infected hosts evolve their virus by accept/reject
// point mutation before passing copies to nearby susceptible hosts. The
// genomes alive when the epidemic ends are screened into a sequence set.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "svsdna/config.hpp"
#include "svsdna/constraints.hpp"
#include "svsdna/sequence.hpp"
#include "svsdna/thermo.hpp"

namespace svsdna {

/// mt19937_64 with distribution code written out so that draws are identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw DomainError("Rng::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do v = eng_();
    while (v >= limit);
    return v % n;
  }

  /// Uniform on the closed range [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

  std::string state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }
  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    if (!is) throw ConfigError("invalid RNG state");
  }

  friend bool operator==(const Rng& a, const Rng& b) { return a.eng_ == b.eng_; }

 private:
  std::mt19937_64 eng_;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// Final pick among the pool. TmWindow: the max_out members adjacent in Tm
/// with the smallest spread. Quality: the max_out members with the lowest
/// pairwise Similarity + H-measure, subject to a Tm variance cap.
enum class Selection { TmWindow, Quality };

/// Hard filters and selection rules applied to the final library.
struct ScreenCriteria {
  /// Allowed |GC - 0.5|; 0 means exact balance (for odd n, the two nearest
  /// counts are accepted).
  double gc_tolerance = 0.0;
  long max_continuity = 0;
  long max_hairpin = 0;
  long self_dimer_cap = 8;
  double tm_min = 60.0;
  double tm_max = 68.0;
  /// Every kept pair must satisfy Sim <= sim_cap and H <= h_cap (both orders).
  long sim_cap = 12;
  long h_cap = 13;
  std::size_t min_out = 7;
  std::size_t max_out = 7;
  Selection selection = Selection::Quality;
  /// Quality selection: Tm sample variance bound and search width.
  double tm_variance_cap = 0.5;
  std::size_t quality_candidates = 24;
};

/// Fitness: keep a mutation iff G does not rise. Constrained: additionally
/// require that the screening violation score does not rise.
enum class Acceptance { Fitness, Constrained };

struct SvsParams {
  int ne = 20;          // mutation trials per infected host per step
  int t_max = 20;       // epidemic steps
  int num_virus = 20;   // initial viruses, m
  int num_host = 300;   // hosts, h
  double lm = 20.0;
  double ln = 20.0;
  double td = 60.0;     // death threshold on toxicity * Dp
  double w1 = 0.5;
  double w2 = 0.5;
  double tran_immune = 0.3;   // chance a self-cure ends Immune
  double type_II_prob = 0.3;  // chance a new infection is type II
  double type_II_conversion_prob = 0.5;  // chance a type II host has a U timer
  double barrier_fraction = 0.7;
  double natural_immunity = 0.05;
  double spread_radius = 3.0;
  IntRange d_range{2, 5};
  IntRange c_range{3, 8};
  IntRange u_range{2, 6};
  int length = 20;
  Acceptance acceptance = Acceptance::Constrained;
  std::uint64_t seed = 1;
  ConstraintParams constraints{};
  TmModel tm_model = TmModel::unified();
  ScreenCriteria screen{};

  void validate() const {
    auto prob = [](double v, const char* k) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(k) + " must be in [0,1]");
    };
    if (ne < 0) throw ConfigError("ne must be >= 0");
    if (t_max < 1 || num_virus < 1 || num_host < 1) throw ConfigError("t_max, num_virus and num_host must be positive");
    if (num_virus > num_host) throw ConfigError("num_virus must not exceed num_host");
    if (!(lm > 0) || !(ln > 0)) throw ConfigError("lm and ln must be positive");
    if (std::abs(w1 + w2 - 1.0) > 1e-9) throw ConfigError("w1 + w2 must equal 1");
    prob(w1, "w1");
    prob(w2, "w2");
    prob(tran_immune, "tran_immune");
    prob(type_II_prob, "type_II_prob");
    prob(type_II_conversion_prob, "type_II_conversion_prob");
    prob(barrier_fraction, "barrier_fraction");
    prob(natural_immunity, "natural_immunity");
    if (!(spread_radius >= 0)) throw ConfigError("spread_radius must be >= 0");
    for (auto [r, k] : {std::pair{d_range, "d_range"}, {c_range, "c_range"}, {u_range, "u_range"}})
      if (r.lo < 1 || r.hi < r.lo) throw ConfigError(std::string(k) + " must satisfy 1 <= lo <= hi");
    if (length < 2 || length > static_cast<int>(kMaxPackedLength)) throw ConfigError("length must be in [2, 64]");
    if (screen.min_out > screen.max_out) throw ConfigError("min_out must not exceed max_out");
    constraints.validate();
    tm_model.validate();
  }
};

/// Keys understood by apply_svs_overrides, in addition to the constraint
/// keys and the "tm." prefix.
inline const std::vector<std::string>& svs_keys() {
  static const std::vector<std::string> keys = {
      "ne", "t_max", "num_virus", "num_host", "lm", "ln", "td", "w1", "w2", "tran_immune", "type_II_prob",
      "type_II_conversion_prob", "barrier_fraction", "natural_immunity", "spread_radius", "d_min", "d_max",
      "c_min", "c_max", "u_min", "u_max", "length", "acceptance", "seed", "screen.gc_tolerance",
      "screen.max_continuity", "screen.max_hairpin", "screen.self_dimer_cap", "screen.tm_min", "screen.tm_max",
      "screen.sim_cap", "screen.h_cap", "screen.min_out", "screen.max_out", "screen.selection",
      "screen.tm_variance_cap", "screen.quality_candidates"};
  return keys;
}

inline SvsParams apply_svs_overrides(SvsParams p, const KeyValues& kv) {
  auto num = [&kv](const char* key, auto& field) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    using T = std::remove_reference_t<decltype(field)>;
    if constexpr (std::is_floating_point_v<T>) {
      field = parse_double(key, it->second);
    } else {
      const long v = parse_long(key, it->second);
      if (v < 0 && std::is_unsigned_v<T>) throw ConfigError(std::string("key '") + key + "' must be >= 0");
      field = static_cast<T>(v);
    }
  };
  num("ne", p.ne);
  num("t_max", p.t_max);
  num("num_virus", p.num_virus);
  num("num_host", p.num_host);
  num("lm", p.lm);
  num("ln", p.ln);
  num("td", p.td);
  num("w1", p.w1);
  num("w2", p.w2);
  num("tran_immune", p.tran_immune);
  num("type_II_prob", p.type_II_prob);
  num("type_II_conversion_prob", p.type_II_conversion_prob);
  num("barrier_fraction", p.barrier_fraction);
  num("natural_immunity", p.natural_immunity);
  num("spread_radius", p.spread_radius);
  num("d_min", p.d_range.lo);
  num("d_max", p.d_range.hi);
  num("c_min", p.c_range.lo);
  num("c_max", p.c_range.hi);
  num("u_min", p.u_range.lo);
  num("u_max", p.u_range.hi);
  num("length", p.length);
  if (auto it = kv.find("seed"); it != kv.end()) {
    const long v = parse_long("seed", it->second);
    if (v < 0) throw ConfigError("seed must be >= 0");
    p.seed = static_cast<std::uint64_t>(v);
  }
  if (auto it = kv.find("acceptance"); it != kv.end()) {
    if (it->second == "fitness") p.acceptance = Acceptance::Fitness;
    else if (it->second == "constrained") p.acceptance = Acceptance::Constrained;
    else throw ConfigError("acceptance must be one of: fitness constrained");
  }
  auto& c = p.screen;
  num("screen.gc_tolerance", c.gc_tolerance);
  num("screen.max_continuity", c.max_continuity);
  num("screen.max_hairpin", c.max_hairpin);
  num("screen.self_dimer_cap", c.self_dimer_cap);
  num("screen.tm_min", c.tm_min);
  num("screen.tm_max", c.tm_max);
  num("screen.sim_cap", c.sim_cap);
  num("screen.h_cap", c.h_cap);
  num("screen.min_out", c.min_out);
  num("screen.max_out", c.max_out);
  num("screen.tm_variance_cap", c.tm_variance_cap);
  num("screen.quality_candidates", c.quality_candidates);
  if (auto it = kv.find("screen.selection"); it != kv.end()) {
    if (it->second == "tm_window") c.selection = Selection::TmWindow;
    else if (it->second == "quality") c.selection = Selection::Quality;
    else throw ConfigError("screen.selection must be one of: tm_window quality");
  }
  p.constraints = apply_constraint_overrides(p.constraints, kv);
  p.tm_model = apply_tm_overrides(p.tm_model, kv, "tm.");
  p.validate();
  return p;
}

/// Fully resolved parameters as key-value text, for metadata blocks.
inline KeyValues describe(const SvsParams& p) {
  KeyValues kv = describe(p.constraints);
  for (auto& [k, v] : describe(p.tm_model)) kv[k] = v;
  auto put = [&kv](const char* k, auto v) {
    if constexpr (std::is_floating_point_v<decltype(v)>) kv[k] = format_double(v);
    else kv[k] = std::to_string(v);
  };
  put("ne", p.ne);
  put("t_max", p.t_max);
  put("num_virus", p.num_virus);
  put("num_host", p.num_host);
  put("lm", p.lm);
  put("ln", p.ln);
  put("td", p.td);
  put("w1", p.w1);
  put("w2", p.w2);
  put("tran_immune", p.tran_immune);
  put("type_II_prob", p.type_II_prob);
  put("type_II_conversion_prob", p.type_II_conversion_prob);
  put("barrier_fraction", p.barrier_fraction);
  put("natural_immunity", p.natural_immunity);
  put("spread_radius", p.spread_radius);
  put("d_min", p.d_range.lo);
  put("d_max", p.d_range.hi);
  put("c_min", p.c_range.lo);
  put("c_max", p.c_range.hi);
  put("u_min", p.u_range.lo);
  put("u_max", p.u_range.hi);
  put("length", p.length);
  put("seed", p.seed);
  kv["acceptance"] = p.acceptance == Acceptance::Constrained ? "constrained" : "fitness";
  const auto& c = p.screen;
  put("screen.gc_tolerance", c.gc_tolerance);
  put("screen.max_continuity", c.max_continuity);
  put("screen.max_hairpin", c.max_hairpin);
  put("screen.self_dimer_cap", c.self_dimer_cap);
  put("screen.tm_min", c.tm_min);
  put("screen.tm_max", c.tm_max);
  put("screen.sim_cap", c.sim_cap);
  put("screen.h_cap", c.h_cap);
  put("screen.min_out", c.min_out);
  put("screen.max_out", c.max_out);
  put("screen.tm_variance_cap", c.tm_variance_cap);
  put("screen.quality_candidates", c.quality_candidates);
  kv["screen.selection"] = c.selection == Selection::Quality ? "quality" : "tm_window";
  return kv;
}

struct Virus {
  DnaSequence genome;
  int gen = 1;
  std::uint64_t id = 0;
};

enum class HostState { Susceptible, InfectedI, InfectedII, Immune, Dead };
inline constexpr int kHostStateCount = 5;

inline const char* to_string(HostState s) {
  switch (s) {
    case HostState::Susceptible: return "susceptible";
    case HostState::InfectedI: return "infected_I";
    case HostState::InfectedII: return "infected_II";
    case HostState::Immune: return "immune";
    case HostState::Dead: return "dead";
  }
  return "?";
}

inline bool is_infected(HostState s) { return s == HostState::InfectedI || s == HostState::InfectedII; }

struct Host {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  HostState state = HostState::Susceptible;
  double dp = 0.0;
  int d_timer = 0;
  int c_timer = 0;
  int u_timer = 0;
  bool dying = false;        // cached wD
  bool convertible = false;  // type II host with a running U timer
  bool ever_infected = false;
  std::optional<Virus> carried;
};

struct HistoryRow {
  int t = 0;
  std::array<int, kHostStateCount> counts{};
  std::size_t library_size = 0;
  long best_g = 0;  // lowest G in the library, 0 when it has fewer than two genomes
};

struct EpidemicState {
  int t = 0;
  std::vector<Host> hosts;
  /// Ids of the viruses carried by infected hosts.
  std::vector<std::uint64_t> library;
  /// Initial genomes, handed out by seed_outbreak.
  std::vector<DnaSequence> initial_genomes;
  Rng rng;
  std::vector<HistoryRow> history;
  bool seeded = false;
  bool finished = false;
  std::uint64_t next_virus_id = 1;
  std::uint64_t g_evaluations = 0;
  /// Neighbours within spread_radius of each host, ascending id.
  std::vector<std::vector<int>> neighbours;
};

/// Spot-check hooks; every field is optional.
struct EngineObserver {
  /// One accept/reject mutation trial. `snapshot` is the frozen library the
  /// G values were computed against (own copy excluded). `g_after` is empty
  /// when the candidate was rejected on constraints before scoring.
  std::function<void(const DnaSequence& before, long g_before, const DnaSequence& after,
                     std::optional<long> g_after, bool kept, std::span<const DnaSequence> snapshot)>
      on_trial;
  std::function<void(double inf)> on_infection_probability;
  std::function<void(const EpidemicState&)> on_step;
};

/// Fitness G(a): Similarity plus H-measure of `a` against a fixed set of
/// other genomes, aggregated the same way as set rows.
class Fitness {
 public:
  Fitness(std::span<const DnaSequence> others, const ConstraintParams& p) : params_(p) {
    packed_.reserve(others.size());
    for (const auto& o : others) packed_.emplace_back(o);
  }

  std::size_t opponents() const { return packed_.size(); }

  long operator()(const DnaSequence& a) const {
    const PackedSequence x(a);
    const auto& sp = params_.similarity;
    long sim = 0;
    long h = params_.h_include_self ? h_measure_pair(x, x, sp) : 0;
    const bool sum = params_.row_aggregate == RowAggregate::Sum;
    for (const auto& o : packed_) {
      const long s = similarity_pair(x, o, sp);
      const long hv = h_measure_pair(x, o, sp);
      sim = sum ? sim + s : std::max(sim, s);
      h = sum ? h + hv : std::max(h, hv);
    }
    // A lone genome has no opponents at all.
    if (packed_.empty()) return 0;
    return sim + h;
  }

 private:
  ConstraintParams params_;
  std::vector<PackedSequence> packed_;
};

inline double toxicity(const Virus& v) {
  if (v.gen < 1) throw DomainError("virus generation must be >= 1");
  return v.gen == 1 ? 100.0 : 100.0 / v.gen + 40.0;
}

inline bool death_check(const Host& host, const Virus& v, const SvsParams& p) { return toxicity(v) * host.dp >= p.td; }

inline double distance_term(double d) {
  if (d < 0.5) return 1.0;
  if (d > 3.0) return 0.0;
  return 1.2 - 0.4 * d;
}

/// Infectiousness from fitness: fitter (lower G) viruses spread more.
inline double spread_score(long g, std::size_t opponents) {
  const double per = opponents == 0 ? 0.0 : static_cast<double>(g) / static_cast<double>(opponents);
  return std::max(0.0, 120.0 - per);
}

inline double infection_probability(double s_value, double d, const SvsParams& p) {
  if (d < 0) throw DomainError("distance must be >= 0");
  return (p.w1 * std::tanh(s_value / 60.0) + p.w2 * distance_term(d)) / 3.0;
}

inline DnaSequence random_balanced_genome(int n, Rng& rng) {
  const int target = n / 2;
  std::vector<Base> bases(static_cast<std::size_t>(n));
  for (;;) {
    int gc = 0;
    for (auto& b : bases) {
      b = kBases[rng.below(4)];
      gc += (b == Base::G || b == Base::C);
    }
    if (gc == target) return DnaSequence(bases);
  }
}

inline std::array<int, kHostStateCount> state_counts(const EpidemicState& s) {
  std::array<int, kHostStateCount> c{};
  for (const auto& h : s.hosts) ++c[static_cast<int>(h.state)];
  return c;
}

/// Genomes of the infected hosts in host-id order.
inline std::vector<DnaSequence> library_genomes(const EpidemicState& s) {
  std::vector<DnaSequence> out;
  for (const auto& h : s.hosts)
    if (h.carried) out.push_back(h.carried->genome);
  return out;
}

inline bool library_consistent(const EpidemicState& s) {
  std::vector<std::uint64_t> carried;
  for (const auto& h : s.hosts) {
    if (h.carried.has_value() != is_infected(h.state)) return false;
    if (h.carried) carried.push_back(h.carried->id);
  }
  auto lib = s.library;
  std::sort(carried.begin(), carried.end());
  std::sort(lib.begin(), lib.end());
  return lib == carried;
}

/// Host ids within `radius` of each host, ascending.
inline std::vector<std::vector<int>> neighbour_lists(const std::vector<Host>& hosts, double radius) {
  std::vector<std::vector<int>> out(hosts.size());
  const double r2 = radius * radius;
  for (const auto& a : hosts)
    for (const auto& b : hosts) {
      if (a.id == b.id) continue;
      const double dx = a.x - b.x, dy = a.y - b.y;
      if (dx * dx + dy * dy <= r2) out[static_cast<std::size_t>(a.id)].push_back(b.id);
    }
  return out;
}

inline EpidemicState init_state(const SvsParams& p) {
  p.validate();
  EpidemicState s;
  s.rng = Rng(p.seed);
  s.hosts.resize(static_cast<std::size_t>(p.num_host));
  for (int i = 0; i < p.num_host; ++i) {
    auto& h = s.hosts[static_cast<std::size_t>(i)];
    h.id = i;
    h.x = s.rng.uniform(0.0, p.lm);
    h.y = s.rng.uniform(0.0, p.ln);
    h.dp = s.rng.uniform();
    h.d_timer = s.rng.between(p.d_range.lo, p.d_range.hi);
    h.c_timer = s.rng.between(p.c_range.lo, p.c_range.hi);
    h.u_timer = s.rng.between(p.u_range.lo, p.u_range.hi);
  }
  for (int v = 0; v < p.num_virus; ++v) s.initial_genomes.push_back(random_balanced_genome(p.length, s.rng));
  s.neighbours = neighbour_lists(s.hosts, p.spread_radius);
  return s;
}

namespace detail {

inline void record_history(EpidemicState& s, const SvsParams& p) {
  HistoryRow row;
  row.t = s.t;
  row.counts = state_counts(s);
  row.library_size = s.library.size();
  const auto lib = library_genomes(s);
  if (lib.size() >= 2) {
    long best = std::numeric_limits<long>::max();
    std::vector<DnaSequence> others;
    for (std::size_t i = 0; i < lib.size(); ++i) {
      others.clear();
      for (std::size_t j = 0; j < lib.size(); ++j)
        if (j != i) others.push_back(lib[j]);
      best = std::min(best, Fitness(others, p.constraints)(lib[i]));
    }
    row.best_g = best;
  }
  s.history.push_back(row);
}

inline bool barrier_reached(const EpidemicState& s, const SvsParams& p) {
  const int immune = state_counts(s)[static_cast<int>(HostState::Immune)];
  return immune > 0 && static_cast<double>(immune) / static_cast<double>(s.hosts.size()) >= p.barrier_fraction;
}

inline void drop_virus(EpidemicState& s, Host& h) {
  const auto id = h.carried->id;
  s.library.erase(std::find(s.library.begin(), s.library.end(), id));
  h.carried.reset();
}

inline void self_cure(EpidemicState& s, Host& h, const SvsParams& p) {
  const double tran = s.rng.uniform();
  h.state = tran > 1.0 - p.tran_immune ? HostState::Immune : HostState::Susceptible;
  drop_virus(s, h);
}

inline void infect(EpidemicState& s, Host& target, Virus v, HostState kind, const SvsParams& p) {
  if (target.ever_infected) {
    target.d_timer = s.rng.between(p.d_range.lo, p.d_range.hi);
    target.c_timer = s.rng.between(p.c_range.lo, p.c_range.hi);
    target.u_timer = s.rng.between(p.u_range.lo, p.u_range.hi);
  }
  target.ever_infected = true;
  target.state = kind;
  v.id = s.next_virus_id++;
  target.dying = kind == HostState::InfectedI && death_check(target, v, p);
  target.convertible = kind == HostState::InfectedII && s.rng.uniform() < p.type_II_conversion_prob;
  s.library.push_back(v.id);
  target.carried = std::move(v);
}

/// Frozen library snapshot for host `self`: every other carried genome.
inline std::vector<DnaSequence> snapshot_excluding(const EpidemicState& s, int self) {
  std::vector<DnaSequence> out;
  for (const auto& h : s.hosts)
    if (h.carried && h.id != self) out.push_back(h.carried->genome);
  return out;
}

}  // namespace detail

inline EpidemicState seed_outbreak(EpidemicState s, const SvsParams& p) {
  if (s.seeded || s.t != 0) throw DomainError("outbreak already seeded");
  const auto h = s.hosts.size();
  std::vector<int> order(h);
  for (std::size_t i = 0; i < h; ++i) order[i] = static_cast<int>(i);
  // Partial Fisher-Yates: first num_virus entries get the initial viruses,
  // the next block starts out naturally immune.
  const std::size_t m = s.initial_genomes.size();
  const auto immune = std::min<std::size_t>(
      h - m, static_cast<std::size_t>(std::floor(p.natural_immunity * static_cast<double>(h) + 0.5)));
  for (std::size_t i = 0; i < m + immune; ++i) std::swap(order[i], order[i + s.rng.below(h - i)]);
  for (std::size_t v = 0; v < m; ++v) {
    auto& host = s.hosts[static_cast<std::size_t>(order[v])];
    detail::infect(s, host, Virus{s.initial_genomes[v], 1, 0}, HostState::InfectedI, p);
  }
  for (std::size_t i = m; i < m + immune; ++i) s.hosts[static_cast<std::size_t>(order[i])].state = HostState::Immune;
  s.seeded = true;
  detail::record_history(s, p);
  if (detail::barrier_reached(s, p)) s.finished = true;
  return s;
}

/// How far a genome is from passing the screening hard filters; 0 when it
/// passes all of them.
inline double screen_violation(const DnaSequence& s, const SvsParams& p) {
  const auto& c = p.screen;
  const long n = static_cast<long>(s.size());
  const long gc = std::lround(gc_content(s) * static_cast<double>(n));
  double v = static_cast<double>(std::abs(2 * gc - n) / 2);
  v += static_cast<double>(std::max(0L, continuity(s, p.constraints.continuity_threshold) - c.max_continuity));
  v += static_cast<double>(std::max(0L, hairpin(s, p.constraints.hairpin) - c.max_hairpin));
  v += static_cast<double>(std::max(0L, self_dimer(s) - c.self_dimer_cap));
  const double t = melting_temperature(s, p.tm_model);
  v += std::max(0.0, c.tm_min - t) + std::max(0.0, t - c.tm_max);
  return v;
}

/// Ne accept/reject point mutations against a frozen library snapshot.
/// Returns the G of the genome left in `v`.
inline long mutate_genome(Virus& v, const Fitness& fitness, const SvsParams& p, Rng& rng, std::uint64_t& g_evals,
                          const EngineObserver* obs = nullptr, std::span<const DnaSequence> snapshot = {}) {
  long g = fitness(v.genome);
  ++g_evals;
  const bool constrained = p.acceptance == Acceptance::Constrained;
  double violation = constrained ? screen_violation(v.genome, p) : 0.0;
  for (int trial = 0; trial < p.ne; ++trial) {
    const auto pos = static_cast<std::size_t>(rng.below(v.genome.size()));
    const Base old = v.genome[pos];
    const auto pick = static_cast<int>(rng.below(3));
    const Base replacement = kBases[(static_cast<int>(old) + 1 + pick) % 4];
    DnaSequence candidate = v.genome.with_base(pos, replacement);
    const double cand_violation = constrained ? screen_violation(candidate, p) : 0.0;
    if (cand_violation > violation) {
      if (obs && obs->on_trial) obs->on_trial(v.genome, g, candidate, std::nullopt, false, snapshot);
      continue;
    }
    const long g_new = fitness(candidate);
    ++g_evals;
    const bool keep = g_new <= g;
    if (obs && obs->on_trial) obs->on_trial(v.genome, g, candidate, g_new, keep, snapshot);
    if (keep) {
      v.genome = std::move(candidate);
      g = g_new;
      violation = cand_violation;
    }
  }
  return g;
}

namespace detail {

/// Evolves the host's virus and returns S(v) for spreading.
inline double evolve(EpidemicState& s, Host& h, const SvsParams& p, const EngineObserver* obs) {
  const auto snapshot = snapshot_excluding(s, h.id);
  const Fitness fitness(snapshot, p.constraints);
  const long g = mutate_genome(*h.carried, fitness, p, s.rng, s.g_evaluations, obs, snapshot);
  return spread_score(g, fitness.opponents());
}

inline void spread(EpidemicState& s, Host& h, double s_value, const SvsParams& p, std::vector<bool>& fresh,
                   const EngineObserver* obs) {
  for (int nb : s.neighbours[static_cast<std::size_t>(h.id)]) {
    auto& target = s.hosts[static_cast<std::size_t>(nb)];
    if (target.state != HostState::Susceptible) continue;
    const double d = std::hypot(h.x - target.x, h.y - target.y);
    const double inf = infection_probability(s_value, d, p);
    if (obs && obs->on_infection_probability) obs->on_infection_probability(inf);
    if (s.rng.uniform() >= inf) continue;
    Virus copy = *h.carried;
    ++copy.gen;
    const double rj = s.rng.uniform();
    const auto kind = rj < 1.0 - p.type_II_prob ? HostState::InfectedI : HostState::InfectedII;
    infect(s, target, std::move(copy), kind, p);
    fresh[static_cast<std::size_t>(nb)] = true;
  }
}

}  // namespace detail

inline void process_type_I(EpidemicState& s, Host& h, const SvsParams& p, std::vector<bool>& fresh,
                           const EngineObserver* obs = nullptr) {
  if (h.state != HostState::InfectedI) throw DomainError("process_type_I on a host that is not type I");
  if (h.dying) {
    if (--h.d_timer <= 0) {
      h.state = HostState::Dead;
      detail::drop_virus(s, h);
      return;
    }
  } else if (--h.c_timer <= 0) {
    detail::self_cure(s, h, p);
    return;
  }
  const double s_value = detail::evolve(s, h, p, obs);
  detail::spread(s, h, s_value, p, fresh, obs);
}

inline void process_type_II(EpidemicState& s, Host& h, const SvsParams& p, const EngineObserver* obs = nullptr) {
  if (h.state != HostState::InfectedII) throw DomainError("process_type_II on a host that is not type II");
  if (--h.c_timer <= 0) {
    detail::self_cure(s, h, p);
    return;
  }
  detail::evolve(s, h, p, obs);
  if (h.convertible && --h.u_timer <= 0) {
    h.state = HostState::InfectedI;
    h.convertible = false;
    h.dying = death_check(h, *h.carried, p);
  }
}

inline EpidemicState step(EpidemicState s, const SvsParams& p, const EngineObserver* obs = nullptr) {
  if (!s.seeded) throw DomainError("step before seed_outbreak");
  if (s.finished) throw DomainError("epidemic already finished");
  std::vector<bool> fresh(s.hosts.size(), false);
  for (auto& h : s.hosts) {
    if (fresh[static_cast<std::size_t>(h.id)]) continue;
    if (h.state == HostState::InfectedI)
      process_type_I(s, h, p, fresh, obs);
    else if (h.state == HostState::InfectedII)
      process_type_II(s, h, p, obs);
  }
  ++s.t;
  detail::record_history(s, p);
  if (s.t >= p.t_max || detail::barrier_reached(s, p)) s.finished = true;
  if (obs && obs->on_step) obs->on_step(s);
  return s;
}

struct ScreenResult {
  std::vector<DnaSequence> sequences;
  std::vector<long> g_values;  // G of each kept sequence against the screened library
  std::size_t library_size = 0;
  std::size_t unique = 0;
  std::size_t passed_filters = 0;
  std::size_t pool = 0;  // survivors of the pairwise caps
  bool shortfall = false;
  std::string report;
};

inline bool gc_ok(const DnaSequence& s, double tolerance) {
  const double n = static_cast<double>(s.size());
  const double gc = gc_content(s);
  const double slack = s.size() % 2 == 1 ? 0.5 / n : 0.0;
  return std::abs(gc - 0.5) <= tolerance + slack + 1e-12;
}

namespace detail {

inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

/// The w members consecutive in Tm order with the smallest Tm variance; ties
/// go to the lower total G. Returned in index order.
inline std::vector<std::size_t> select_tm_window(const std::vector<double>& tms, const std::vector<long>& gs,
                                                 std::size_t w) {
  std::vector<std::size_t> by_tm(tms.size());
  for (std::size_t i = 0; i < by_tm.size(); ++i) by_tm[i] = i;
  if (by_tm.size() <= w) return by_tm;
  std::stable_sort(by_tm.begin(), by_tm.end(), [&](std::size_t a, std::size_t b) { return tms[a] < tms[b]; });
  double best_var = std::numeric_limits<double>::infinity();
  long best_g = std::numeric_limits<long>::max();
  std::size_t best_start = 0;
  std::vector<double> window(w);
  for (std::size_t st = 0; st + w <= by_tm.size(); ++st) {
    long gsum = 0;
    for (std::size_t k = 0; k < w; ++k) {
      window[k] = tms[by_tm[st + k]];
      gsum += gs[by_tm[st + k]];
    }
    const double var = sample_variance(window);
    if (var < best_var - 1e-12 || (std::abs(var - best_var) <= 1e-12 && gsum < best_g)) {
      best_var = var;
      best_g = gsum;
      best_start = st;
    }
  }
  std::vector<std::size_t> out(by_tm.begin() + static_cast<long>(best_start),
                               by_tm.begin() + static_cast<long>(best_start + w));
  std::sort(out.begin(), out.end());
  return out;
}

/// Exhaustive search over w-subsets of the first quality_candidates pool
/// members for the lowest total pairwise Similarity + H-measure whose Tm
/// variance stays within the cap. Empty when no subset qualifies.
inline std::vector<std::size_t> select_by_quality(std::span<const PackedSequence> pool, const std::vector<double>& tms,
                                                  const ScreenCriteria& c, const SimilarityParams& sp) {
  const std::size_t n = std::min(pool.size(), c.quality_candidates);
  const std::size_t w = c.max_out;
  if (n < w) return {};
  std::vector<long> cost(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const long v = similarity_pair(pool[i], pool[j], sp) + h_measure_pair(pool[i], pool[j], sp) +
                     similarity_pair(pool[j], pool[i], sp) + h_measure_pair(pool[j], pool[i], sp);
      cost[i * n + j] = cost[j * n + i] = v;
    }
  std::vector<std::size_t> cur, best;
  long best_cost = std::numeric_limits<long>::max();
  std::vector<double> t(w);
  auto dfs = [&](auto&& self, std::size_t from, long acc) -> void {
    if (acc >= best_cost) return;
    if (cur.size() == w) {
      for (std::size_t k = 0; k < w; ++k) t[k] = tms[cur[k]];
      if (sample_variance(t) <= c.tm_variance_cap) {
        best_cost = acc;
        best = cur;
      }
      return;
    }
    for (std::size_t i = from; i + (w - cur.size()) <= n; ++i) {
      long add = 0;
      for (auto k : cur) add += cost[k * n + i];
      cur.push_back(i);
      self(self, i + 1, acc + add);
      cur.pop_back();
    }
  };
  dfs(dfs, 0, 0);
  return best;
}

}  // namespace detail

/// Filters a genome library down to a sequence set: dedupe, hard filters,
/// rank by G, greedy pairwise caps, then pick max_out of the pool.
inline ScreenResult screen_library(std::vector<DnaSequence> lib, const SvsParams& p, std::uint64_t* g_evals = nullptr) {
  if (lib.empty()) throw DomainError("cannot screen an empty library");
  const auto& c = p.screen;
  ScreenResult out;
  out.library_size = lib.size();
  std::sort(lib.begin(), lib.end());
  lib.erase(std::unique(lib.begin(), lib.end()), lib.end());
  out.unique = lib.size();

  struct Candidate {
    DnaSequence seq;
    long g;
    double tm;
  };
  std::vector<Candidate> pass;
  std::vector<DnaSequence> others;
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const auto& s = lib[i];
    if (!gc_ok(s, c.gc_tolerance)) continue;
    if (continuity(s, p.constraints.continuity_threshold) > c.max_continuity) continue;
    if (hairpin(s, p.constraints.hairpin) > c.max_hairpin) continue;
    if (self_dimer(s) > c.self_dimer_cap) continue;
    const double t = melting_temperature(s, p.tm_model);
    if (t < c.tm_min || t > c.tm_max) continue;
    others.clear();
    for (std::size_t j = 0; j < lib.size(); ++j)
      if (j != i) others.push_back(lib[j]);
    const long g = Fitness(others, p.constraints)(s);
    if (g_evals) ++*g_evals;
    pass.push_back({s, g, t});
  }
  out.passed_filters = pass.size();
  std::stable_sort(pass.begin(), pass.end(), [](const Candidate& a, const Candidate& b) { return a.g < b.g; });

  const auto& sp = p.constraints.similarity;
  std::vector<Candidate> pool;
  std::vector<PackedSequence> pool_packed;
  for (auto& cand : pass) {
    const PackedSequence x(cand.seq);
    bool ok = true;
    for (const auto& k : pool_packed) {
      if (similarity_pair(x, k, sp) > c.sim_cap || similarity_pair(k, x, sp) > c.sim_cap ||
          h_measure_pair(x, k, sp) > c.h_cap || h_measure_pair(k, x, sp) > c.h_cap) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    pool_packed.push_back(x);
    pool.push_back(std::move(cand));
  }
  out.pool = pool.size();

  std::vector<double> tms;
  std::vector<long> gs;
  for (const auto& cand : pool) {
    tms.push_back(cand.tm);
    gs.push_back(cand.g);
  }
  std::vector<std::size_t> chosen;
  if (pool.size() <= c.max_out) {
    for (std::size_t i = 0; i < pool.size(); ++i) chosen.push_back(i);
  } else if (c.selection == Selection::Quality) {
    chosen = detail::select_by_quality(pool_packed, tms, c, sp);
  }
  if (chosen.empty()) chosen = detail::select_tm_window(tms, gs, c.max_out);
  for (auto i : chosen) {
    out.sequences.push_back(pool[i].seq);
    out.g_values.push_back(pool[i].g);
  }
  out.shortfall = out.sequences.size() < c.min_out;
  std::ostringstream rep;
  rep << "library " << out.library_size << ", unique " << out.unique << ", passed filters " << out.passed_filters
      << ", pool " << out.pool << ", kept " << out.sequences.size();
  if (out.shortfall) rep << "; shortfall: " << out.sequences.size() << " < min_out " << c.min_out;
  out.report = rep.str();
  return out;
}

inline ScreenResult screen(const EpidemicState& s, const SvsParams& p, std::uint64_t* g_evals = nullptr) {
  if (!s.finished) throw DomainError("screening needs a finished epidemic");
  return screen_library(library_genomes(s), p, g_evals);
}

/// Mean over ordered pairs of Similarity + H-measure; the quality figure
/// used to compare design runs (lower is better).
inline double mean_pairwise_quality(std::span<const DnaSequence> set, const SimilarityParams& sp = {}) {
  if (set.size() < 2) throw DomainError("pairwise quality needs at least 2 sequences");
  std::vector<PackedSequence> packed(set.begin(), set.end());
  double total = 0.0;
  for (std::size_t i = 0; i < packed.size(); ++i)
    for (std::size_t j = 0; j < packed.size(); ++j)
      if (i != j) total += static_cast<double>(similarity_pair(packed[i], packed[j], sp) + h_measure_pair(packed[i], packed[j], sp));
  return total / static_cast<double>(packed.size() * (packed.size() - 1));
}

struct DesignResult {
  std::vector<DnaSequence> sequences;
  std::vector<ConstraintProfile> profiles;  // empty when fewer than 2 sequences
  std::vector<HistoryRow> history;
  ScreenResult screen;
  std::uint64_t g_evaluations = 0;
  std::uint64_t seed = 0;
  int steps = 0;
};

inline DesignResult finish_design(ScreenResult sr, const SvsParams& p) {
  DesignResult r;
  r.sequences = sr.sequences;
  if (r.sequences.size() >= 2) r.profiles = profile_set(r.sequences, p.constraints, p.tm_model);
  r.screen = std::move(sr);
  r.seed = p.seed;
  return r;
}

inline DesignResult run(const SvsParams& p, const EngineObserver* obs = nullptr) {
  auto s = seed_outbreak(init_state(p), p);
  while (!s.finished) s = step(std::move(s), p, obs);
  auto sr = screen(s, p, &s.g_evaluations);
  auto r = finish_design(std::move(sr), p);
  r.history = s.history;
  r.g_evaluations = s.g_evaluations;
  r.steps = s.t;
  return r;
}

}  // namespace svsdna
