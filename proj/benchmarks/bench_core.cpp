#include <benchmark/benchmark.h>

#include "qpwegner/randelette.hpp"
#include "qpwegner/spectral.hpp"
#include "qpwegner/wegner_mc.hpp"

using namespace qpwegner;

static void BM_EvaluatePotential(benchmark::State& state) {
  const auto field = RandeletteField::make({}, ThetaSample::keyed(7), 1,
                                           static_cast<int>(state.range(0)));
  const ShiftAction action = ShiftAction::golden_mean_1d();
  const TorusPoint omega({0.137});
  std::int64_t x = 0;
  for (auto _ : state) {
    double v = potential(field, action, omega, {static_cast<int>(x++ % 64)});
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_EvaluatePotential)->Arg(8)->Arg(16)->Arg(32)->Arg(63);

static void BM_AssembleAndSolveTwoParticle(benchmark::State& state) {
  const int radius = static_cast<int>(state.range(0));
  const auto field = RandeletteField::make({}, ThetaSample::keyed(7), 1, 16);
  const ShiftAction action = ShiftAction::golden_mean_1d();
  const TwoParticleCube cube{{0}, {0}, radius};
  const InteractionSpec interaction;
  double t = 0.0;
  for (auto _ : state) {
    const TorusPoint omega({t += 0.001});
    const auto h = assemble_two_particle(cube, field, action, omega, interaction);
    const Spectrum s = eigenvalues_symmetric(h);
    benchmark::DoNotOptimize(s.eigenvalues.data());
  }
  state.SetComplexityN((2 * radius + 1) * (2 * radius + 1));
}
BENCHMARK(BM_AssembleAndSolveTwoParticle)->DenseRange(1, 4)->Complexity();

static void BM_MinSpacing(benchmark::State& state) {
  const ShiftAction action = ShiftAction::golden_mean_1d();
  const TorusPoint origin({0.0});
  const LatticeCube cube{{0}, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    double d = min_spacing(action, origin, cube);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_MinSpacing)->Arg(64)->Arg(256)->Arg(512);

BENCHMARK_MAIN();
