#pragma once

// Two-state nearest-neighbor melting temperature for short perfect duplexes.

#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "svsdna/config.hpp"
#include "svsdna/sequence.hpp"

namespace svsdna {

/// Enthalpy in kcal/mol, entropy in cal/(mol*K).
struct Thermo {
  double dh = 0.0;
  double ds = 0.0;
  friend bool operator==(const Thermo&, const Thermo&) = default;
};

enum class SaltCorrection { None, Entropy };

inline constexpr double kGasConstant = 1.987;  // cal/(mol*K)
inline constexpr double kKelvin = 273.15;

struct TmModel {
  /// Indexed by 4 * first + second (5'->3' on the top strand).
  std::array<Thermo, 16> stacks{};
  Thermo init_gc{};  // per terminal G.C pair
  Thermo init_at{};  // per terminal A.T pair
  double strand_conc = 1e-6;  // total strand concentration C_T, mol/L
  double na_conc = 1.0;       // monovalent cation, mol/L
  SaltCorrection salt = SaltCorrection::Entropy;

  Thermo& stack(Base a, Base b) { return stacks[4 * static_cast<int>(a) + static_cast<int>(b)]; }
  const Thermo& stack(Base a, Base b) const { return stacks[4 * static_cast<int>(a) + static_cast<int>(b)]; }

  void validate() const {
    if (!(strand_conc > 0)) throw ConfigError("strand_conc must be > 0");
    if (!(na_conc > 0)) throw ConfigError("na_conc must be > 0");
  }

  /// Unified nearest-neighbor table (SantaLucia 1998) with the strand and
  /// salt concentrations fitted once against the SVS reference column:
  /// Na+ fixed at 50 mM, C_T solved so the 20-mer rows match within 0.01 C.
  static TmModel unified() {
    TmModel m;
    auto set = [&m](const char* nn, double dh, double ds) {
      const Base a = *base_from_char(nn[0]);
      const Base b = *base_from_char(nn[1]);
      m.stack(a, b) = {dh, ds};
      m.stack(complement(b), complement(a)) = {dh, ds};
    };
    set("AA", -7.9, -22.2);
    set("AT", -7.2, -20.4);
    set("TA", -7.2, -21.3);
    set("CA", -8.5, -22.7);
    set("GT", -8.4, -22.4);
    set("CT", -7.8, -21.0);
    set("GA", -8.2, -22.2);
    set("CG", -10.6, -27.2);
    set("GC", -9.8, -24.4);
    set("GG", -8.0, -19.9);
    m.init_gc = {0.1, -2.8};
    m.init_at = {2.3, 4.1};
    m.strand_conc = 3.77e-4;
    m.na_conc = 0.05;
    m.salt = SaltCorrection::Entropy;
    return m;
  }
};

inline bool is_self_complementary(const DnaSequence& s) { return reverse_complement(s) == s; }

inline Thermo duplex_thermo(const DnaSequence& s, const TmModel& model) {
  if (s.size() < 2) throw DomainError("Tm needs at least 2 bases");
  Thermo t;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const auto& nn = model.stack(s[i], s[i + 1]);
    t.dh += nn.dh;
    t.ds += nn.ds;
  }
  for (Base end : {s[0], s[s.size() - 1]}) {
    const auto& init = (end == Base::G || end == Base::C) ? model.init_gc : model.init_at;
    t.dh += init.dh;
    t.ds += init.ds;
  }
  if (model.salt == SaltCorrection::Entropy)
    t.ds += 0.368 * static_cast<double>(s.size() - 1) * std::log(model.na_conc);
  return t;
}

/// Melting temperature in degrees Celsius.
inline double melting_temperature(const DnaSequence& s, const TmModel& model = TmModel::unified()) {
  const Thermo t = duplex_thermo(s, model);
  const double ct = is_self_complementary(s) ? model.strand_conc : model.strand_conc / 4.0;
  return 1000.0 * t.dh / (t.ds + kGasConstant * std::log(ct)) - kKelvin;
}

struct TmStats {
  double mean = 0.0;
  double variance = 0.0;  // sample variance, n-1 denominator
};

inline TmStats tm_stats_values(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("Tm statistics need at least 2 values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0)};
}

inline TmStats tm_stats(std::span<const DnaSequence> set, const TmModel& model = TmModel::unified()) {
  if (set.size() < 2) throw DomainError("Tm statistics need at least 2 sequences");
  std::vector<double> values;
  values.reserve(set.size());
  for (const auto& s : set) values.push_back(melting_temperature(s, model));
  return tm_stats_values(values);
}

/// Applies key-value overrides on top of `model`. Keys:
///   strand_conc, na_conc, salt_correction (entropy|none),
///   init.GC / init.AT / stack.XY = "<dh> <ds>".
/// Setting stack.XY also sets its complementary stack.
inline TmModel apply_tm_overrides(TmModel model, const KeyValues& kv, const std::string& prefix = "") {
  auto pair_value = [](const std::string& key, const std::string& value) {
    std::istringstream is(value);
    Thermo t;
    if (!(is >> t.dh >> t.ds)) throw ConfigError("key '" + key + "': expected '<dh> <ds>'");
    std::string rest;
    if (is >> rest) throw ConfigError("key '" + key + "': trailing text '" + rest + "'");
    return t;
  };
  for (const auto& [full_key, value] : kv) {
    if (full_key.rfind(prefix, 0) != 0) continue;
    const std::string key = full_key.substr(prefix.size());
    if (key == "strand_conc") {
      model.strand_conc = parse_double(full_key, value);
    } else if (key == "na_conc") {
      model.na_conc = parse_double(full_key, value);
    } else if (key == "salt_correction") {
      if (value == "entropy") model.salt = SaltCorrection::Entropy;
      else if (value == "none") model.salt = SaltCorrection::None;
      else throw ConfigError("salt_correction must be entropy or none");
    } else if (key == "init.GC") {
      model.init_gc = pair_value(full_key, value);
    } else if (key == "init.AT") {
      model.init_at = pair_value(full_key, value);
    } else if (key.rfind("stack.", 0) == 0 && key.size() == 8) {
      auto a = base_from_char(key[6]);
      auto b = base_from_char(key[7]);
      if (!a || !b) throw ConfigError("unknown stack '" + key + "'");
      const Thermo t = pair_value(full_key, value);
      model.stack(*a, *b) = t;
      model.stack(complement(*b), complement(*a)) = t;
    } else if (!prefix.empty()) {
      throw ConfigError("unknown Tm model key '" + full_key + "'");
    }
  }
  model.validate();
  return model;
}

inline TmModel load_tm_model(const std::string& path) {
  return apply_tm_overrides(TmModel::unified(), load_key_values(path));
}

inline KeyValues describe(const TmModel& m) {
  KeyValues kv;
  kv["tm.strand_conc"] = format_double(m.strand_conc);
  kv["tm.na_conc"] = format_double(m.na_conc);
  kv["tm.salt_correction"] = m.salt == SaltCorrection::Entropy ? "entropy" : "none";
  auto pair = [](const Thermo& t) { return format_double(t.dh) + " " + format_double(t.ds); };
  kv["tm.init.GC"] = pair(m.init_gc);
  kv["tm.init.AT"] = pair(m.init_at);
  for (Base a : kBases)
    for (Base b : kBases) kv[std::string("tm.stack.") + to_char(a) + to_char(b)] = pair(m.stack(a, b));
  return kv;
}

}  // namespace svsdna
