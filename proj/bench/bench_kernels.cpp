// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "ekma/ekma.hpp"
#include "ekma/features.hpp"
#include "ekma/forest.hpp"
#include "ekma/impute.hpp"
#include "ekma/synth.hpp"

using namespace ekma;

namespace {

struct Data {
  FeatureMatrix raw;   // with gaps
  FeatureMatrix full;  // imputed
  StandardizationStats stats;
  ForestModel model;
  BaselineSet baseline;
};

const Data& data() {
  static const Data d = [] {
    SyntheticSpec spec;
    spec.span = {make_date(2024, 5, 1), make_date(2024, 9, 30)};
    spec.noise_sd = 0.003;
    spec.pollutant_missing = 0.05;
    const FeatureMatrix all = build_features(synth_generate(spec));
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < all.rows(); ++r)
      if (!is_missing(all.target()[r])) keep.push_back(r);
    Data out;
    out.raw = all.select_rows(keep);
    out.stats = compute_standardization(out.raw);
    out.full = impute_training_pool(out.raw, out.stats, 5);
    ForestParams p;
    p.num_trees = 50;
    out.model = train_forest(out.full, out.full.target(), p);
    out.baseline = select_baseline(out.full, BaselineCriteria{});
    return out;
  }();
  return d;
}

ForestParams bench_params() {
  ForestParams p;
  p.num_trees = 20;
  return p;
}

void BM_TrainForest(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(d.full, d.full.target(), bench_params()));
}
void BM_TrainForestReference(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(reference::train_forest(d.full, d.full.target(), bench_params()));
}

void BM_Predict(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(predict(d.model, d.full));
}
void BM_PredictReference(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(reference::predict(d.model, d.full));
}

void BM_KnnImpute(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(knn_impute(d.raw, d.full, d.stats, 5));
}
void BM_KnnImputeReference(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(reference::knn_impute(d.raw, d.full, d.stats, 5));
}

void BM_TrainingPool(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(impute_training_pool(d.raw, d.stats, 5));
}
void BM_TrainingPoolReference(benchmark::State& state) {
  const auto& d = data();
  for (auto _ : state) benchmark::DoNotOptimize(reference::impute_training_pool(d.raw, d.stats, 5));
}

void BM_Surface(benchmark::State& state) {
  const auto& d = data();
  const auto g = uniform_grid(kScaleMin, kScaleMax, 11);
  for (auto _ : state) benchmark::DoNotOptimize(ekma_surface(d.model, d.baseline, g, g));
}
void BM_SurfaceReference(benchmark::State& state) {
  const auto& d = data();
  const auto g = uniform_grid(kScaleMin, kScaleMax, 11);
  for (auto _ : state) benchmark::DoNotOptimize(reference::ekma_surface(d.model, d.baseline, g, g));
}

}  // namespace

BENCHMARK(BM_TrainForest)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainForestReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnImpute)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnImputeReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainingPool)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainingPoolReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Surface)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SurfaceReference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
