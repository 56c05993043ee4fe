#include <benchmark/benchmark.h>

#include "apexrl/env.hpp"
#include "apexrl/raceline.hpp"
#include "apexrl/trackgen.hpp"

using namespace apexrl;

namespace {

void BM_EnvStep(benchmark::State& state) {
  const TrackRows rows = gen_stadium(60.0, 20.0, 6.0);
  const TrackModel track = build_track(rows.points, rows.w_left, rows.w_right, 1.0);
  RacingLine line = solve_mcrl(track, 2.0, 1e-4, 30);
  GGVParams ggv;
  speed_profile(line, ggv);
  EnvConfig cfg;
  cfg.grid.H = 12;
  cfg.grid.W = 12;
  cfg.grid.cell_size = 4.0;
  RaceEnv env(track, line, VehicleParams{}, ggv, EnvelopeParams{}, cfg);
  env.reset(1, Stage::kTrajectoryGuidance);
  const Eigen::Vector2d action(0.2, 0.0);
  for (auto _ : state) {
    if (env.episode_over()) env.reset(1, Stage::kTrajectoryGuidance);
    benchmark::DoNotOptimize(env.step(action));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EnvStep);

}  // namespace

BENCHMARK_MAIN();
