#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "support/synthetic_corpus.hpp"
#include "tempmark/eval.hpp"
#include "tempmark/greenlist.hpp"
#include "tempmark/ngram_lm.hpp"
#include "tempmark/seeded_random.hpp"
#include "tempmark/vocab.hpp"
#include "tempmark/watermark.hpp"

namespace {

using namespace tempmark;
using namespace tempmark::testing;

struct Fixture {
  Vocab vocab;
  NGramModel model;

  Fixture()
      : vocab(build_vocab(corpus_text(), 8192)),
        model(NGramModel::train(encode(corpus_text(), vocab), 3, 1e-6, vocab.size())) {}

  static const std::string& corpus_text() {
    static const std::string text =
        make_corpus_text({.seed = 17, .n_word_types = 256, .n_tokens = 120000});
    return text;
  }

  static const Fixture& get() {
    static const Fixture fixture;
    return fixture;
  }
};

void BM_ContextHash(benchmark::State& state) {
  const TokenSeq window{123, 456};
  for (auto _ : state) {
    benchmark::DoNotOptimize(context_hash({window.data(), window.size()}, 2));
  }
}
BENCHMARK(BM_ContextHash);

void BM_SampleTemperature(benchmark::State& state) {
  const WatermarkParams params;
  const TokenSeq window{123, 456};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_temperature(params, {window.data(), window.size()}));
  }
}
BENCHMARK(BM_SampleTemperature);

void BM_GreenPartition(benchmark::State& state) {
  const int vocab_size = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(green_partition(++seed, vocab_size, 0.5));
  }
}
BENCHMARK(BM_GreenPartition)->Arg(256)->Arg(4096);

void BM_SoftmaxTemperature(benchmark::State& state) {
  LogitsVector logits(static_cast<std::size_t>(state.range(0)));
  SplitMix64 rng(1);
  for (double& v : logits) v = rng.next_unit() * 10.0 - 5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(softmax_with_temperature(logits, 0.8));
  }
}
BENCHMARK(BM_SoftmaxTemperature)->Arg(256)->Arg(4096);

void BM_NgramLogits(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const TokenSeq context{10, 11, 12};
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.model.logits(context));
  }
}
BENCHMARK(BM_NgramLogits);

void BM_GenerateTokens(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const WatermarkParams params;
  const TokenSeq prompt{10, 11};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        generate(f.model, prompt, params, static_cast<int>(state.range(0)), ++seed));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateTokens)->Arg(200);

void BM_DetectTokens(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const WatermarkParams params;
  const GenerationRecord record =
      generate(f.model, TokenSeq{10, 11}, params, static_cast<int>(state.range(0)), 7);
  const TokenSeq text = detection_text(record, params.window_len);
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect(f.model, text, params, 0.5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectTokens)->Arg(200);

void BM_DetectBaseline(benchmark::State& state) {
  const Fixture& f = Fixture::get();
  const BaselineParams params;
  const GenerationRecord record =
      generate_baseline(f.model, TokenSeq{10, 11}, params, 200, 7);
  const TokenSeq text = detection_text(record, params.window_len);
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect_baseline(text, params, f.model.vocab_size()));
  }
}
BENCHMARK(BM_DetectBaseline);

void BM_RocCurve(benchmark::State& state) {
  SplitMix64 rng(3);
  std::vector<double> pos;
  std::vector<double> neg;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    pos.push_back(rng.next_unit() * 0.6 + 0.3);
    neg.push_back(rng.next_unit() * 0.6);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(roc(pos, neg));
  }
}
BENCHMARK(BM_RocCurve)->Arg(200)->Arg(2000);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
