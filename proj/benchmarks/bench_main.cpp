#include <benchmark/benchmark.h>

#include <random>
#include <unordered_set>

#include "outreach/blocking.hpp"
#include "outreach/lookalike.hpp"
#include "outreach/matching.hpp"
#include "outreach/phonetics.hpp"
#include "outreach/synth.hpp"

using namespace outreach;

namespace {

const Scenario& scenario() {
  static const Scenario s = [] {
    SynthConfig cfg;
    cfg.reference_size = 20000;
    cfg.input_size = 2000;
    cfg.feature_count = 40;
    return generate_scenario(cfg);
  }();
  return s;
}

const std::vector<NormalizedRecord>& reference() {
  static const auto r = normalize_all(scenario().reference.records);
  return r;
}

const std::vector<NormalizedRecord>& inputs() {
  static const auto r = normalize_all(scenario().inputs.records);
  return r;
}

const BlockingIndex& index() {
  static const auto idx = build_index(reference());
  return idx;
}

TrainingSet training_set() {
  const auto& s = scenario();
  std::unordered_set<std::string> positives;
  for (const auto& p : s.truth.pairs) positives.insert(p.reference_id);
  return build_training_set(positives, s.reference.feature_names, s.reference.records, 1);
}

}  // namespace

static void BM_Soundex(benchmark::State& state) {
  const auto& refs = reference();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(phonetic_code(refs[i++ % refs.size()].last_name));
  }
}
BENCHMARK(BM_Soundex);

static void BM_JaroWinkler(benchmark::State& state) {
  const auto& refs = reference();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = refs[i % refs.size()];
    const auto& b = refs[(i * 7 + 1) % refs.size()];
    benchmark::DoNotOptimize(string_similarity(a.last_name, b.last_name));
    ++i;
  }
}
BENCHMARK(BM_JaroWinkler);

static void BM_BuildIndex(benchmark::State& state) {
  const auto& refs = reference();
  for (auto _ : state) benchmark::DoNotOptimize(build_index(refs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(refs.size()));
}
BENCHMARK(BM_BuildIndex)->Unit(benchmark::kMillisecond);

static void BM_Candidates(benchmark::State& state) {
  const auto& idx = index();
  const auto& in = inputs();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(candidates(idx, in[i++ % in.size()]));
}
BENCHMARK(BM_Candidates)->Unit(benchmark::kMicrosecond);

static void BM_PairScore(benchmark::State& state) {
  const auto& refs = reference();
  const auto& in = inputs();
  const auto& model = default_pair_model();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto f = pair_features(in[i % in.size()], refs[(i * 13) % refs.size()]);
    benchmark::DoNotOptimize(score_pair(model, f));
    ++i;
  }
}
BENCHMARK(BM_PairScore);

static void BM_MatchFile(benchmark::State& state) {
  const auto& idx = index();
  const ReferenceStore store(idx, reference());
  MatchOptions opt;
  opt.workers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(match_file(idx, default_pair_model(), inputs(), store, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(inputs().size()));
}
BENCHMARK(BM_MatchFile)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_LassoFit(benchmark::State& state) {
  const auto ts = training_set();
  const double lambda = lambda_max(ts) * 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(train_l1_logistic(ts, lambda));
  state.counters["rows"] = static_cast<double>(ts.rows());
}
BENCHMARK(BM_LassoFit)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
