#include <benchmark/benchmark.h>

#include "vgstar/forward.hpp"
#include "vgstar/medium.hpp"

using namespace vgs;

namespace {

MediumRealization patch(double half) {
  return sample_matern(make_medium_spec(2, Box{{-half, 0, 0.045 - half}, {half, 0, 0.045 + half}}, 1500.0, 7.5e-5,
                                        0.15, 0.3 / 1.7320508075688772, 1));
}

}  // namespace

static void BM_SampleMatern(benchmark::State& state) {
  const double half = state.range(0) * 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(patch(half));
}
BENCHMARK(BM_SampleMatern)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_AssembleReflectionMatrix(benchmark::State& state) {
  const MediumRealization r = patch(state.range(0) * 1e-3);
  const ProbeGeometry probe{2, 0.015, 15, 64};
  const Bandwidth bw{2 * kPi * 3e6, 6e6, 16, PulseShape::flat, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(assemble_reflection_matrix(r, probe, bw));
  state.counters["scatterers"] = static_cast<double>(r.size());
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(r.size()) * 15 * 64 * 16);
}
BENCHMARK(BM_AssembleReflectionMatrix)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_PointTargetMatrix(benchmark::State& state) {
  const ProbeGeometry probe{2, 0.015, 15, 64};
  const Bandwidth bw{2 * kPi * 3e6, 6e6, static_cast<int>(state.range(0)), PulseShape::flat, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(point_target_matrix({0, 0, 0.045}, 1.0, 1500.0, probe, bw));
}
BENCHMARK(BM_PointTargetMatrix)->Arg(32)->Arg(128);
