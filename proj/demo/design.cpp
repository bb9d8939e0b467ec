// Runs a reduced epidemic and prints the screened sequences.
//   demo_design [seed]

#include <cstdio>
#include <cstdlib>

#include "svsdna/svs_engine.hpp"

int main(int argc, char** argv) {
  using namespace svsdna;
  SvsParams p;
  p.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  p.num_host = 120;  // smaller grid, a couple of seconds
  p.t_max = 12;
  p.screen.min_out = 4;
  p.screen.max_out = 4;

  EngineObserver obs;
  obs.on_step = [](const EpidemicState& s) {
    const auto& r = s.history.back();
    std::printf("t=%2d  S=%3d I=%3d II=%3d immune=%3d dead=%3d library=%zu best_g=%ld\n", r.t, r.counts[0],
                r.counts[1], r.counts[2], r.counts[3], r.counts[4], r.library_size, r.best_g);
  };
  const auto result = run(p, &obs);
  std::printf("%s\n", result.screen.report.c_str());
  for (std::size_t i = 0; i < result.sequences.size(); ++i)
    std::printf("S%zu %s  Tm %.2f\n", i + 1, result.sequences[i].str().c_str(),
                melting_temperature(result.sequences[i], p.tm_model));
  return result.screen.shortfall ? 1 : 0;
}
