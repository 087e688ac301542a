#include <benchmark/benchmark.h>

#include "finsent/blstm.hpp"

namespace {

using namespace finsent;

struct Setup {
  BlstmModel model;
  PaddedSequence seq;
};

Setup make_setup(std::size_t hidden) {
  BlstmConfig cfg;
  cfg.hidden = hidden;
  cfg.embed_dim = 300;
  cfg.max_len = 20;
  Rng init(derive_seed(3, "init"));
  Setup s{init_blstm_model<float>(cfg, init), {}};
  Rng rng(4);
  s.seq.matrix.resize(20, 300);
  for (Eigen::Index r = 0; r < s.seq.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < s.seq.matrix.cols(); ++c)
      s.seq.matrix(r, c) = static_cast<float>(rng.uniform(-1, 1));
  s.seq.valid_len = 20;
  return s;
}

void BM_BlstmForward(benchmark::State& state) {
  Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        blstm_forward<float>(s.model, s.seq, nullptr, nullptr));
  }
}
BENCHMARK(BM_BlstmForward)->Arg(50)->Arg(100);

void BM_BlstmForwardBackward(benchmark::State& state) {
  Setup s = make_setup(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    ForwardCacheT<float> cache;
    blstm_forward<float>(s.model, s.seq, nullptr, &cache);
    benchmark::DoNotOptimize(blstm_backward<float>(
        s.model, {&s.seq}, {0.5}, {&cache}, {nullptr}));
  }
}
BENCHMARK(BM_BlstmForwardBackward)->Arg(50)->Arg(100);

}  // namespace
