#include <benchmark/benchmark.h>

#include "vgstar/estimator.hpp"
#include "vgstar/forward.hpp"
#include "vgstar/imaging.hpp"

using namespace vgs;

namespace {

ImagingConfig config(int n_freq) {
  return ImagingConfig{1500.0, 1500.0, ProbeGeometry{2, 0.015, 15, 64},
                       Bandwidth{2 * kPi * 3e6, 6e6, n_freq, PulseShape::flat, 0.0}};
}

}  // namespace

static void BM_ConfocalImage(benchmark::State& state) {
  const ImagingConfig c = config(64);
  const ReflectionMatrix m = point_target_matrix({0, 0, 0.045}, 1.0, 1500.0, c.probe, c.bw);
  const int n = static_cast<int>(state.range(0));
  const PixelGrid grid = centered_grid({0, 0, 0.045}, 6.25e-5, 6.25e-5, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(confocal_image(m, c, grid));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ConfocalImage)->Arg(21)->Arg(61)->Unit(benchmark::kMillisecond);

static void BM_ParaxialPsf(benchmark::State& state) {
  const ImagingConfig c = config(64);
  double dx = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(psf_paraxial({1e-3, 0, 0.045}, {dx, 0, 0}, c));
    dx += 1e-7;
  }
}
BENCHMARK(BM_ParaxialPsf);

static void BM_BuildKMatrix(benchmark::State& state) {
  const ImagingConfig c = config(64);
  const ReflectionMatrix m = point_target_matrix({0, 0, 0.045}, 1.0, 1500.0, c.probe, c.bw);
  const GuideStarSpec g{{}, 3e-5, make_c_grid(1400, 1600, 5),
                        ring_shifts(static_cast<std::size_t>(state.range(0)), c.wavelength() / 2, 1)};
  for (auto _ : state) benchmark::DoNotOptimize(build_K_matrix(m, g));
}
BENCHMARK(BM_BuildKMatrix)->Arg(32)->Unit(benchmark::kMillisecond);
