#pragma once

// JSON snapshots of the epidemic state, used to compare runs step by step.

#include <string>

#include "json.hpp"
#include "svsdna/svs_engine.hpp"

namespace svsdna {

inline nlohmann::json to_json(const HistoryRow& r) {
  nlohmann::json j;
  j["t"] = r.t;
  for (int i = 0; i < kHostStateCount; ++i) j[to_string(static_cast<HostState>(i))] = r.counts[static_cast<std::size_t>(i)];
  j["library_size"] = r.library_size;
  j["best_g"] = r.best_g;
  return j;
}

inline nlohmann::json to_json(const EpidemicState& s) {
  nlohmann::json j;
  j["t"] = s.t;
  j["seeded"] = s.seeded;
  j["finished"] = s.finished;
  j["next_virus_id"] = s.next_virus_id;
  j["g_evaluations"] = s.g_evaluations;
  j["rng"] = s.rng.state();
  j["library"] = s.library;
  auto& genomes = j["initial_genomes"] = nlohmann::json::array();
  for (const auto& g : s.initial_genomes) genomes.push_back(g.str());
  auto& hosts = j["hosts"] = nlohmann::json::array();
  for (const auto& h : s.hosts) {
    nlohmann::json hj{{"id", h.id},
                      {"x", h.x},
                      {"y", h.y},
                      {"state", to_string(h.state)},
                      {"dp", h.dp},
                      {"d_timer", h.d_timer},
                      {"c_timer", h.c_timer},
                      {"u_timer", h.u_timer},
                      {"dying", h.dying},
                      {"convertible", h.convertible},
                      {"ever_infected", h.ever_infected}};
    if (h.carried) hj["virus"] = {{"genome", h.carried->genome.str()}, {"gen", h.carried->gen}, {"id", h.carried->id}};
    hosts.push_back(std::move(hj));
  }
  auto& history = j["history"] = nlohmann::json::array();
  for (const auto& r : s.history) history.push_back(to_json(r));
  return j;
}

namespace detail {

inline HostState host_state_from(const std::string& name) {
  for (int i = 0; i < kHostStateCount; ++i)
    if (name == to_string(static_cast<HostState>(i))) return static_cast<HostState>(i);
  throw ConfigError("unknown host state '" + name + "'");
}

}  // namespace detail

/// Rebuilds a state written by to_json. Neighbour lists are derived from the
/// stored positions and `p.spread_radius`.
inline EpidemicState state_from_json(const nlohmann::json& j, const SvsParams& p) {
  EpidemicState s;
  s.t = j.at("t").get<int>();
  s.seeded = j.at("seeded").get<bool>();
  s.finished = j.at("finished").get<bool>();
  s.next_virus_id = j.at("next_virus_id").get<std::uint64_t>();
  s.g_evaluations = j.at("g_evaluations").get<std::uint64_t>();
  s.rng.set_state(j.at("rng").get<std::string>());
  s.library = j.at("library").get<std::vector<std::uint64_t>>();
  for (const auto& g : j.at("initial_genomes")) s.initial_genomes.push_back(parse_sequence(g.get<std::string>()));
  for (const auto& hj : j.at("hosts")) {
    Host h;
    h.id = hj.at("id").get<int>();
    h.x = hj.at("x").get<double>();
    h.y = hj.at("y").get<double>();
    h.state = detail::host_state_from(hj.at("state").get<std::string>());
    h.dp = hj.at("dp").get<double>();
    h.d_timer = hj.at("d_timer").get<int>();
    h.c_timer = hj.at("c_timer").get<int>();
    h.u_timer = hj.at("u_timer").get<int>();
    h.dying = hj.at("dying").get<bool>();
    h.convertible = hj.at("convertible").get<bool>();
    h.ever_infected = hj.at("ever_infected").get<bool>();
    if (hj.contains("virus")) {
      const auto& v = hj["virus"];
      h.carried = Virus{parse_sequence(v.at("genome").get<std::string>()), v.at("gen").get<int>(),
                        v.at("id").get<std::uint64_t>()};
    }
    s.hosts.push_back(std::move(h));
  }
  for (const auto& rj : j.at("history")) {
    HistoryRow r;
    r.t = rj.at("t").get<int>();
    for (int i = 0; i < kHostStateCount; ++i)
      r.counts[static_cast<std::size_t>(i)] = rj.at(to_string(static_cast<HostState>(i))).get<int>();
    r.library_size = rj.at("library_size").get<std::size_t>();
    r.best_g = rj.at("best_g").get<long>();
    s.history.push_back(r);
  }
  s.neighbours = neighbour_lists(s.hosts, p.spread_radius);
  return s;
}

}  // namespace svsdna
