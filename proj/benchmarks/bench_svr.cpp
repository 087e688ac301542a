#include <benchmark/benchmark.h>

#include "finsent/rng.hpp"
#include "finsent/svr.hpp"

namespace {

using namespace finsent;

std::vector<SparseFeatureVector> bench_data(std::size_t n, std::size_t width,
                                            std::size_t nnz,
                                            std::vector<double>& y) {
  Rng rng(1);
  std::vector<SparseFeatureVector> X;
  for (std::size_t i = 0; i < n; ++i) {
    SparseFeatureVector v;
    v.width = static_cast<std::uint32_t>(width);
    std::uint32_t col = 0;
    for (std::size_t k = 0; k < nnz; ++k) {
      col += 1 + static_cast<std::uint32_t>(rng.uniform_index(width / nnz - 1));
      if (col >= width) break;
      v.entries.emplace_back(col, 1.0);
    }
    X.push_back(std::move(v));
    y.push_back(rng.uniform(-1, 1));
  }
  return X;
}

void BM_TrainSvr(benchmark::State& state) {
  std::vector<double> y;
  auto X = bench_data(static_cast<std::size_t>(state.range(0)), 2000, 20, y);
  SvrConfig cfg;
  cfg.C = 0.1;
  cfg.epsilon = 0.01;
  cfg.tol = 1e-6;
  cfg.max_iter = 200;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_svr(X, y, cfg));
  }
}
BENCHMARK(BM_TrainSvr)->Arg(100)->Arg(400);

}  // namespace
