#include <benchmark/benchmark.h>

#include "apexrl/raceline.hpp"
#include "apexrl/trackgen.hpp"

using namespace apexrl;

namespace {

void BM_SolveMcrl(benchmark::State& state) {
  const TrackRows rows = gen_stadium(100.0, 20.0, 6.0);
  const TrackModel track = build_track(rows.points, rows.w_left, rows.w_right, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_mcrl(track, 2.0, 1e-4, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_SolveMcrl)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SpeedProfile(benchmark::State& state) {
  const TrackRows rows = gen_stadium(100.0, 20.0, 6.0);
  const TrackModel track = build_track(rows.points, rows.w_left, rows.w_right, 1.0);
  RacingLine line = solve_mcrl(track, 2.0, 1e-4, 30);
  const GGVParams ggv;
  for (auto _ : state) {
    speed_profile(line, ggv);
    benchmark::DoNotOptimize(line.records.back().u_ref);
  }
}
BENCHMARK(BM_SpeedProfile);

}  // namespace

BENCHMARK_MAIN();
