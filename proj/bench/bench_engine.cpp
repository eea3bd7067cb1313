#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "perseval/corpus.hpp"
#include "perseval/distance_metric.hpp"
#include "perseval/engine.hpp"

using namespace perseval;

namespace {

std::string random_text(std::mt19937_64& rng, int words) {
  static const char* vocab[] = {"city", "council", "budget", "park",  "water", "ice",
                                "moon", "team",    "match",  "storm", "school", "road",
                                "tax",  "vote",    "fuel",   "ship",  "crew",  "trade"};
  std::uniform_int_distribution<int> pick(0, std::size(vocab) - 1);
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += vocab[pick(rng)];
  }
  return out;
}

const EvaluationCorpus& corpus() {
  static const EvaluationCorpus c = [] {
    std::mt19937_64 rng(7);
    CorpusBuilder b;
    for (int d = 0; d < 200; ++d) {
      const std::string doc = "d" + std::to_string(d);
      b.add(Document{doc, random_text(rng, 400)});
      for (int u = 0; u < 4; ++u) {
        const std::string user = "u" + std::to_string(u);
        b.add(GoldReference{doc, user, random_text(rng, 60)});
        b.add(GeneratedSummary{"m", doc, user, random_text(rng, 60)});
      }
    }
    return std::move(b).build();
  }();
  return c;
}

MetricKind kind_of(int64_t index) { return all_metric_kinds()[static_cast<std::size_t>(index)]; }

void BM_ScoreSerial(benchmark::State& state) {
  const auto metric = make_metric(kind_of(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(score_model_serial(corpus(), "m", *metric, {}));
  state.SetLabel(std::string(to_string(metric->kind())));
}

void BM_ScoreParallel(benchmark::State& state) {
  const auto metric = make_metric(kind_of(state.range(0)));
  EngineOptions options;
  options.jobs = static_cast<int>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(score_model(corpus(), "m", *metric, {}, {}, options));
  state.SetLabel(std::string(to_string(metric->kind())));
}

// rouge_l, meteor, jsd
BENCHMARK(BM_ScoreSerial)->Arg(0)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreParallel)
    ->ArgsProduct({{0, 3, 4}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
