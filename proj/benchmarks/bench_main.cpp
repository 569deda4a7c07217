#include <benchmark/benchmark.h>

#include "gcs/distributions.hpp"
#include "gcs/guidance.hpp"
#include "gcs/prior.hpp"
#include "gcs/sampler.hpp"
#include "gcs/world.hpp"

using namespace gcs;

namespace {

struct Fixture {
  world::Benchmark bench;
  std::vector<Scene> corpus;
  MarkovGridPrior model;
  std::shared_ptr<const LikelihoodTable> table;

  static const Fixture& get() {
    static const Fixture f = [] {
      auto cfg = world::landscape_2x4();
      cfg.corpus_size = 200;
      auto bench = world::generate_benchmark(cfg);
      std::vector<Scene> corpus;
      for (const auto& g : bench.corpus) corpus.push_back(g.scene);
      auto model = train_markov_prior(corpus, ContextTemplate::left_above(), true, 0.5);
      const auto style = histogram_from_grid(bench.exemplars[0][0].scene.tokens, 0.5);
      const InMemorySceneSource src(corpus);
      const auto data = monte_carlo_dataset_distribution(src, 100, 0.5, 1);
      auto table = std::make_shared<LikelihoodTable>(
          LikelihoodTable::make_global(style_likelihood(style, data)));
      return Fixture{std::move(bench), std::move(corpus), std::move(model), std::move(table)};
    }();
    return f;
  }
};

void BM_SampleGrid(benchmark::State& state) {
  const auto& f = Fixture::get();
  const auto& sem = *f.corpus[0].semantics;
  SamplingConfig cfg;
  if (state.range(0)) cfg.guidance = f.table;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_grid(f.model, 32, 32, &sem, cfg));
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * 32 * 32);
}
BENCHMARK(BM_SampleGrid)->Arg(0)->Arg(1);

void BM_Histogram(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(histogram_from_grid(f.corpus[0].tokens, 0.5));
}
BENCHMARK(BM_Histogram);

void BM_MonteCarlo(benchmark::State& state) {
  const auto& f = Fixture::get();
  const InMemorySceneSource src(f.corpus);
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_dataset_distribution(src, std::size_t(state.range(0)), 0.5, 1));
  }
}
BENCHMARK(BM_MonteCarlo)->Arg(100)->Arg(700);

void BM_TrainPrior(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_markov_prior(f.corpus, ContextTemplate::left_above(), true, 0.5));
  }
}
BENCHMARK(BM_TrainPrior);

}  // namespace

BENCHMARK_MAIN();
