#include <benchmark/benchmark.h>

#include "finsent/embeddings.hpp"
#include "finsent/rng.hpp"

namespace {

using namespace finsent;

WordVectors bench_vectors(std::size_t words) {
  Rng rng(2);
  WordVectors wv;
  wv.dim = 300;
  wv.matrix.reserve(words * wv.dim);
  for (std::size_t i = 0; i < words; ++i) {
    std::string w = "w" + std::to_string(i);
    wv.index.emplace(w, i);
    wv.vocab.push_back(std::move(w));
    for (std::size_t d = 0; d < wv.dim; ++d)
      wv.matrix.push_back(static_cast<float>(rng.uniform(-1, 1)));
  }
  return wv;
}

void BM_MostSimilar(benchmark::State& state) {
  WordVectors wv = bench_vectors(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(most_similar(wv, "w0", 10));
  }
}
BENCHMARK(BM_MostSimilar)->Arg(10000)->Arg(50000);

}  // namespace
