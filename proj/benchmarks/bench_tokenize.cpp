#include <benchmark/benchmark.h>

#include "finsent/tokenize.hpp"

namespace {

const char* kHeadline =
    "Barclays' pre-tax profit rises 12.5% to £1.9bn as UK's FTSE-100 "
    "rallies; see www.example.com/results for Q3 details!";

void BM_WhitespaceTokenize(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(finsent::whitespace_tokenize(kHeadline));
  }
}
BENCHMARK(BM_WhitespaceTokenize);

void BM_RuleTokenize(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(finsent::rule_tokenize(kHeadline));
  }
}
BENCHMARK(BM_RuleTokenize);

}  // namespace
