// Parallel kernels against their serial references on a small synthetic corpus.

#include <benchmark/benchmark.h>

#include "moodpipe/labeling.hpp"
#include "moodpipe/serial.hpp"
#include "moodpipe/synth.hpp"

using namespace moodpipe;

namespace {

struct Fixture {
  std::vector<std::uint32_t> ids;
  std::vector<AudioClip> clips;
  FeatureMatrix features;
  LabelMatrix labels;
  std::vector<int> power;
  Dataset data;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SynthOptions opt;
    opt.tracks = 48;
    opt.seconds = 3.0;
    const SynthCorpus corpus = plan_corpus(opt);
    Fixture fx;
    for (const auto& t : corpus.tracks) {
      fx.ids.push_back(t.track_id);
      fx.clips.push_back(render_track(t, opt));
    }
    fx.features = extract_matrix(fx.ids, fx.clips, FrameSpec{}, BaseFeatureSet::canonical());
    fx.labels = apply_consensus(build_score_matrix(corpus.annotations), 0.30);
    fx.power = fx.labels.column(Emotion::kPower);
    fx.data = continuous_dataset(fx.features);
    return fx;
  }();
  return f;
}

ExperimentPlan plan() {
  ExperimentPlan p;
  p.preprocessing = PreprocessSpec::parse("discr+cfs");
  p.classifier.family = Family::kNaiveBayes;
  p.initializations = 1;
  return p;
}

void BM_extract_parallel(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(extract_matrix(f.ids, f.clips, FrameSpec{}, BaseFeatureSet::canonical()));
}
void BM_extract_serial(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s)
    benchmark::DoNotOptimize(serial::extract_matrix(f.ids, f.clips, FrameSpec{}, BaseFeatureSet::canonical()));
}

void BM_discretize_parallel(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(fit_discretization(f.features.values, f.features.columns, f.power));
}
void BM_discretize_serial(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s)
    benchmark::DoNotOptimize(serial::fit_discretization(f.features.values, f.features.columns, f.power));
}

void BM_correlations_parallel(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(cfs_correlations(f.data, f.power));
}
void BM_correlations_serial(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(serial::cfs_correlations(f.data, f.power));
}

void BM_experiment_parallel(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(run_experiment(plan(), f.features, f.labels));
}
void BM_experiment_serial(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(serial::run_experiment(plan(), f.features, f.labels));
}

}  // namespace

BENCHMARK(BM_extract_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_extract_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_discretize_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_discretize_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_correlations_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_correlations_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_experiment_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_experiment_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
