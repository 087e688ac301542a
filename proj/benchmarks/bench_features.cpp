#include <benchmark/benchmark.h>

#include "finsent/features.hpp"

namespace {

using namespace finsent;

ReplacementConfig bench_replacements() {
  ReplacementLexicon pos{"excellent", 3, {"rises", "soars", "gains"}};
  ReplacementLexicon neg{"poor", 3, {"falls", "slides", "warns"}};
  return ReplacementConfig::build({"Glencore", "Deutsche Bank", "HSBC"},
                                  TokenizerMode::Rules, pos, neg, true, true,
                                  true);
}

TokenSequence bench_tokens() {
  return rule_tokenize("Deutsche Bank shares plunge as Glencore rises 3.5%");
}

void BM_ApplyReplacements(benchmark::State& state) {
  auto cfg = bench_replacements();
  auto tokens = bench_tokens();
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_replacements(tokens, cfg));
  }
}
BENCHMARK(BM_ApplyReplacements);

void BM_Vectorize(benchmark::State& state) {
  auto cfg = bench_replacements();
  auto tokens = apply_replacements(bench_tokens(), cfg);
  auto grams = extract_ngrams(tokens, {true, true});
  std::vector<std::vector<std::string>> corpus(200, grams);
  Vocabulary vocab = fit_vocabulary(corpus, {"Glencore", "HSBC"}, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vectorize(grams, "Glencore", vocab));
  }
}
BENCHMARK(BM_Vectorize);

}  // namespace
