#include <benchmark/benchmark.h>

#include "spotattack/classifier.hpp"
#include "spotattack/ga_search.hpp"
#include "spotattack/imaging.hpp"
#include "spotattack/rng.hpp"
#include "spotattack/toy_models.hpp"

namespace {

using namespace spotattack;

CharImage noise_image(std::uint64_t seed) {
  Rng rng(seed);
  CharImage img(kCharDims);
  for (int r = 0; r < kCharDims.height; ++r)
    for (int c = 0; c < kCharDims.width; ++c)
      for (int ch = 0; ch < CharImage::kChannels; ++ch) img.set(r, c, ch, static_cast<double>(rng.uniform_int(0, 255)));
  return img;
}

void BM_StandardPredict(benchmark::State& state) {
  const LabelSet labels = LabelSet::standard();
  const ClassifierModel model = make_model(standard_architecture(labels.size()), labels, kCharDims, 7);
  const CharImage img = noise_image(1);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(img));
}
BENCHMARK(BM_StandardPredict)->Unit(benchmark::kMillisecond);

void BM_ApplySpot(benchmark::State& state) {
  const CharImage img = noise_image(2);
  const int r = static_cast<int>(state.range(0));
  const SpotSpec spec{shape::Circle{r}, {30, 17}, 200, SpotMode::Replace};
  for (auto _ : state) benchmark::DoNotOptimize(apply_spot(img, spec));
}
BENCHMARK(BM_ApplySpot)->Arg(3)->Arg(7);

void BM_GaPlanted(benchmark::State& state) {
  const Region region = feasible_region(shape::Rect{3}, kCharDims);
  const FitnessFn fitness = [](Position p) { return planted_fitness(p, {30, 17}, 50.0); };
  GaParams params;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    params.seed = ++seed;
    benchmark::DoNotOptimize(run_ga(fitness, region, params));
  }
}
BENCHMARK(BM_GaPlanted);

void BM_GaFixtureAttack(benchmark::State& state) {
  const PlantedVulnerableFixture fx = make_planted_vulnerable_fixture();
  const std::size_t target = fx.model.labels().index_of(fx.target);
  const Region region = feasible_region(shape::Rect{fx.side}, kCharDims);
  const FitnessFn fitness = [&](Position p) {
    const SpotSpec spec{shape::Rect{fx.side}, p, fx.delta, SpotMode::Replace};
    return fx.model.predict(apply_spot(fx.image, spec)).values[target];
  };
  GaParams params;
  params.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_ga(fitness, region, params));
}
BENCHMARK(BM_GaFixtureAttack)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
