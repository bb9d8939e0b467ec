#pragma once

// Command-line front end: evaluate, design, stats and oracle-check modes.
// run_cli is the whole program; tools/svsdna.cpp only forwards argv.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "svsdna/config.hpp"
#include "svsdna/constraints.hpp"
#include "svsdna/oracle.hpp"
#include "svsdna/sequence.hpp"
#include "svsdna/svs_engine.hpp"
#include "svsdna/thermo.hpp"

namespace svsdna::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string mode;
  std::vector<std::string> inputs;
  std::string output;
  std::string format = "table";
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::vector<std::string> sets;
  bool values = false;
};

namespace detail {

inline bool known_key(const std::string& key) {
  static const std::vector<std::string> extra = {"oracle.pairs"};
  for (const auto& k : svs_keys())
    if (k == key) return true;
  for (const auto& [k, v] : describe(ConstraintParams{}))
    if (k == key) return true;
  for (const auto& k : extra)
    if (k == key) return true;
  return key.rfind("tm.", 0) == 0;  // checked in full by apply_tm_overrides
}

inline KeyValues resolve_key_values(const RunConfig& cfg) {
  KeyValues kv;
  if (!cfg.config_path.empty()) kv = load_key_values(cfg.config_path);
  for (const auto& s : cfg.sets) {
    auto [k, v] = split_assignment(s);
    kv[k] = v;
  }
  if (cfg.seed) kv["seed"] = std::to_string(*cfg.seed);
  for (const auto& [k, v] : kv)
    if (!known_key(k)) throw ConfigError("unknown config key '" + k + "'");
  return kv;
}

struct Metadata {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }

  std::string as_comments() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries) os << "# " << k << '=' << v << '\n';
    return os.str();
  }

  nlohmann::ordered_json as_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : entries) j[k] = v;
    return j;
  }
};

inline Metadata make_metadata(const std::string& mode, const SvsParams& p) {
  Metadata m;
  m.add("format_version", std::to_string(kFormatVersion));
  m.add("svsdna_version", kVersion);
  m.add("mode", mode);
  m.add("seed", std::to_string(p.seed));
  for (const auto& [k, v] : describe(p))
    if (k != "seed") m.add("config." + k, v);
  return m;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

/// Left-aligned text table.
inline std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      os << r[c];
      if (c + 1 < r.size()) os << std::string(width[c] - r[c].size() + 2, ' ');
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

inline std::string join_csv(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out + '\n';
}

inline const std::vector<std::string>& profile_columns() {
  static const std::vector<std::string> cols = {"name", "sequence",   "similarity", "h_measure", "continuity",
                                                "hairpin", "gc", "tm", "self_dimer"};
  return cols;
}

inline std::string render_profiles(const std::vector<NamedSequence>& seqs, const std::vector<ConstraintProfile>& prof,
                                   long sim_total, long h_total, const std::string& format, const Metadata& meta) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["metadata"] = meta.as_json();
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const auto& p = prof[i];
      rows.push_back({{"name", seqs[i].name},
                      {"sequence", seqs[i].sequence.str()},
                      {"similarity", p.similarity},
                      {"h_measure", p.h_measure},
                      {"continuity", p.continuity},
                      {"hairpin", p.hairpin},
                      {"gc", p.gc},
                      {"tm", p.tm},
                      {"self_dimer", p.self_dimer}});
    }
    j["totals"] = {{"similarity", sim_total}, {"h_measure", h_total}};
    return j.dump(2) + '\n';
  }
  if (format == "csv") {
    std::string out = meta.as_comments() + join_csv(profile_columns());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const auto& p = prof[i];
      out += join_csv({seqs[i].name, seqs[i].sequence.str(), std::to_string(p.similarity), std::to_string(p.h_measure),
                       std::to_string(p.continuity), std::to_string(p.hairpin), format_double(p.gc),
                       format_double(p.tm), std::to_string(p.self_dimer)});
    }
    out += join_csv({"total", "", std::to_string(sim_total), std::to_string(h_total), "", "", "", "", ""});
    return out;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto& p = prof[i];
    rows.push_back({seqs[i].name, seqs[i].sequence.str(), std::to_string(p.similarity), std::to_string(p.h_measure),
                    std::to_string(p.continuity), std::to_string(p.hairpin), fixed(p.gc, 3), fixed(p.tm, 2),
                    std::to_string(p.self_dimer)});
  }
  rows.push_back({"total", "", std::to_string(sim_total), std::to_string(h_total), "", "", "", "", ""});
  return meta.as_comments() + render_table(profile_columns(), rows);
}

inline std::string render_history(const std::vector<HistoryRow>& history, const Metadata& meta) {
  std::string out = meta.as_comments() +
                    join_csv({"step", "susceptible", "infected_I", "infected_II", "immune", "dead", "library_size", "best_g"});
  for (const auto& r : history) {
    std::vector<std::string> cells{std::to_string(r.t)};
    for (int c : r.counts) cells.push_back(std::to_string(c));
    cells.push_back(std::to_string(r.library_size));
    cells.push_back(std::to_string(r.best_g));
    out += join_csv(cells);
  }
  return out;
}

inline std::string render_sequences(const std::vector<DnaSequence>& seqs, const Metadata& meta) {
  std::string out = meta.as_comments();
  for (std::size_t i = 0; i < seqs.size(); ++i) out += ">S" + std::to_string(i + 1) + '\n' + seqs[i].str() + '\n';
  return out;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write " + path);
  f << text;
}

inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty())
    out << text;
  else
    write_file(cfg.output, text);
}

/// "LABEL=path" or a bare path labelled by its file stem.
inline std::pair<std::string, std::string> labelled_input(const std::string& arg) {
  if (auto eq = arg.find('='); eq != std::string::npos && eq > 0) return {arg.substr(0, eq), arg.substr(eq + 1)};
  return {std::filesystem::path(arg).stem().string(), arg};
}

/// Plain numbers, one per line; a line may carry a leading label, in which
/// case its last field is the value.
inline std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::string field, last;
    while (is >> field) last = field;
    if (last.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(last.c_str(), &end);
    if (end != last.c_str() + last.size())
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected a number, got '" + last + "'", 0, lineno);
    out.push_back(v);
  }
  return out;
}

inline SvsParams resolve_params(const RunConfig& cfg) { return apply_svs_overrides(SvsParams{}, resolve_key_values(cfg)); }

inline int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.size() != 1) throw UsageError("evaluate needs exactly one --input");
  const auto params = resolve_params(cfg);
  const auto named = read_sequence_file(cfg.inputs[0]);
  const auto seqs = sequences_of(named);
  if (seqs.size() < 2) throw DomainError(cfg.inputs[0] + ": evaluate needs at least 2 sequences");
  const auto prof = profile_set(seqs, params.constraints, params.tm_model);
  long sim_total = 0, h_total = 0;
  for (const auto& p : prof) {
    sim_total += p.similarity;
    h_total += p.h_measure;
  }
  auto meta = make_metadata("evaluate", params);
  meta.add("input", cfg.inputs[0]);
  emit(cfg, render_profiles(named, prof, sim_total, h_total, cfg.format, meta), out);
  return kOk;
}

inline int cmd_design(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.inputs.empty()) throw UsageError("design takes no --input");
  const auto params = resolve_params(cfg);
  const auto result = run(params);
  const auto meta = make_metadata("design", params);
  std::vector<NamedSequence> named;
  for (std::size_t i = 0; i < result.sequences.size(); ++i)
    named.push_back({"S" + std::to_string(i + 1), result.sequences[i]});
  std::string profile;
  if (result.sequences.size() >= 2) {
    long sim_total = 0, h_total = 0;
    for (const auto& p : result.profiles) {
      sim_total += p.similarity;
      h_total += p.h_measure;
    }
    profile = render_profiles(named, result.profiles, sim_total, h_total, cfg.format, meta);
  }
  if (cfg.output.empty()) {
    out << (profile.empty() ? render_sequences(result.sequences, meta) : profile);
  } else {
    const std::string ext = cfg.format == "json" ? ".json" : cfg.format == "csv" ? ".csv" : ".txt";
    write_file(cfg.output + ".fasta", render_sequences(result.sequences, meta));
    write_file(cfg.output + ".history.csv", render_history(result.history, meta));
    if (!profile.empty()) write_file(cfg.output + ".profile" + ext, profile);
  }
  err << "design: " << result.screen.report << ", steps " << result.steps << ", G evaluations "
      << result.g_evaluations << '\n';
  return result.screen.shortfall ? kDomainError : kOk;
}

inline int cmd_stats(const RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.empty()) throw UsageError("stats needs at least one --input");
  const auto params = resolve_params(cfg);
  struct Row {
    std::string label;
    std::size_t count;
    TmStats stats;
  };
  std::vector<Row> rows;
  for (const auto& arg : cfg.inputs) {
    const auto [label, path] = labelled_input(arg);
    std::vector<double> values;
    if (cfg.values) {
      values = read_values(path);
    } else {
      for (const auto& s : read_sequence_file(path)) values.push_back(melting_temperature(s.sequence, params.tm_model));
    }
    if (values.size() < 2) throw DomainError(path + ": Tm statistics need at least 2 values");
    rows.push_back({label, values.size(), tm_stats_values(values)});
  }
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].stats.variance < rows[b].stats.variance; });
  std::string ordering;
  for (std::size_t k = 0; k < order.size(); ++k) ordering += (k ? " < " : "") + rows[order[k]].label;

  auto meta = make_metadata("stats", params);
  meta.add("source", cfg.values ? "values" : "tm_model");
  std::string text;
  if (cfg.format == "json") {
    nlohmann::ordered_json j;
    j["metadata"] = meta.as_json();
    auto& sets = j["sets"] = nlohmann::ordered_json::array();
    for (const auto& r : rows)
      sets.push_back({{"label", r.label}, {"count", r.count}, {"mean", r.stats.mean}, {"variance", r.stats.variance}});
    auto& ord = j["variance_order"] = nlohmann::ordered_json::array();
    for (auto i : order) ord.push_back(rows[i].label);
    text = j.dump(2) + '\n';
  } else if (cfg.format == "csv") {
    text = meta.as_comments() + join_csv({"label", "count", "mean", "variance"});
    for (const auto& r : rows)
      text += join_csv({r.label, std::to_string(r.count), format_double(r.stats.mean), format_double(r.stats.variance)});
    text += "# variance_order=" + ordering + '\n';
  } else {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
      cells.push_back({r.label, std::to_string(r.count), fixed(r.stats.mean, 2), fixed(r.stats.variance, 2)});
    text = meta.as_comments() + render_table({"label", "count", "mean", "variance"}, cells) +
           "variance order: " + ordering + '\n';
  }
  emit(cfg, text, out);
  return kOk;
}

inline int cmd_oracle_check(const RunConfig& cfg, std::ostream& out) {
  const auto kv = resolve_key_values(cfg);
  const auto params = apply_svs_overrides(SvsParams{}, kv);
  std::size_t pairs = 200;
  if (auto it = kv.find("oracle.pairs"); it != kv.end()) {
    const long v = parse_long("oracle.pairs", it->second);
    if (v < 1) throw ConfigError("oracle.pairs must be >= 1");
    pairs = static_cast<std::size_t>(v);
  }
  const auto report = oracle::run_oracle_check(params.seed, pairs);
  emit(cfg, make_metadata("oracle-check", params).as_comments() + oracle::render(report), out);
  return report.pass() ? kOk : kDomainError;
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"DNA sequence set design and evaluation", "svsdna"};
  app.add_option("--mode", cfg.mode, "evaluate | design | stats | oracle-check")
      ->required()
      ->check(CLI::IsMember({"evaluate", "design", "stats", "oracle-check"}));
  app.add_option("--input", cfg.inputs, "input file; stats accepts LABEL=path and repeats");
  app.add_option("--output", cfg.output, "output file (design: base path for .fasta/.history.csv/.profile.*)");
  app.add_option("--format", cfg.format, "csv | json | table")->check(CLI::IsMember({"csv", "json", "table"}));
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--config", cfg.config_path, "key=value config file");
  app.add_option("--set", cfg.sets, "key=value override, repeatable");
  app.add_flag("--values", cfg.values, "stats: inputs hold printed Tm values instead of sequences");
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsageError;
  }
  try {
    if (cfg.mode == "evaluate") return detail::cmd_evaluate(cfg, out);
    if (cfg.mode == "design") return detail::cmd_design(cfg, out, err);
    if (cfg.mode == "stats") return detail::cmd_stats(cfg, out);
    return detail::cmd_oracle_check(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
}

}  // namespace svsdna::cli
