#include "finsent/blstm.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"

using namespace finsent;

namespace {

// Independent scalar LSTM for the H=1 hand-evaluation fixture.
struct ScalarLstm {
  // gate order i, f, g, o; two inputs
  double Wi[2], Wf[2], Wg[2], Wo[2];
  double Ui, Uf, Ug, Uo;
  double bi, bf, bg, bo;

  static double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  void step(const double x[2], double& h, double& c) const {
    const double i = sig(Wi[0] * x[0] + Wi[1] * x[1] + Ui * h + bi);
    const double f = sig(Wf[0] * x[0] + Wf[1] * x[1] + Uf * h + bf);
    const double g = std::tanh(Wg[0] * x[0] + Wg[1] * x[1] + Ug * h + bg);
    const double o = sig(Wo[0] * x[0] + Wo[1] * x[1] + Uo * h + bo);
    c = f * c + i * g;
    h = o * std::tanh(c);
  }
};

BlstmConfig tiny_config(std::size_t hidden, std::size_t embed_dim,
                        std::size_t max_len, BlstmVariant variant,
                        std::uint64_t seed) {
  BlstmConfig cfg;
  cfg.hidden = hidden;
  cfg.embed_dim = embed_dim;
  cfg.max_len = max_len;
  cfg.variant = variant;
  cfg.seed = seed;
  return cfg;
}

template <typename T>
PaddedSequenceT<T> random_sequence(std::size_t L, std::size_t E, Rng& rng) {
  PaddedSequenceT<T> seq;
  seq.matrix.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(E));
  for (Eigen::Index r = 0; r < seq.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < seq.matrix.cols(); ++c)
      seq.matrix(r, c) = static_cast<T>(rng.uniform(-1, 1));
  seq.valid_len = L;
  return seq;
}

template <typename T>
BlstmModelT<T> zero_model(std::size_t hidden, std::size_t embed_dim,
                          std::size_t max_len) {
  BlstmModelT<T> model;
  model.config = tiny_config(hidden, embed_dim, max_len,
                             BlstmVariant::Slstm, 0);
  const auto H = static_cast<Eigen::Index>(hidden);
  const auto E = static_cast<Eigen::Index>(embed_dim);
  for (auto* p : {&model.forward_params, &model.backward_params}) {
    p->W = MatX<T>::Zero(4 * H, E);
    p->U = MatX<T>::Zero(4 * H, H);
    p->b = VecX<T>::Zero(4 * H);
  }
  model.dense_w = VecX<T>::Zero(2 * H);
  model.dense_b = 0;
  return model;
}

WordVectors tiny_embeddings(std::size_t dim, std::uint64_t seed,
                            const std::vector<std::string>& words) {
  WordVectors wv;
  wv.dim = dim;
  Rng rng(seed);
  for (const auto& w : words) {
    wv.index.emplace(w, wv.vocab.size());
    wv.vocab.push_back(w);
    for (std::size_t d = 0; d < dim; ++d)
      wv.matrix.push_back(static_cast<float>(rng.uniform(-0.8, 0.8)));
  }
  return wv;
}

TokenSequence token_seq(std::vector<std::string> tokens) {
  TokenSequence seq;
  seq.tokens = std::move(tokens);
  return seq;
}

}  // namespace

TEST_CASE("embed_sequence: OOV, padding, truncation") {
  WordVectors wv = tiny_embeddings(4, 1, {"a", "b", "c", "d", "e"});

  auto seq = embed_sequence<float>(token_seq({"a", "zzz"}), wv, 3, 4);
  CHECK(seq.valid_len == 2);
  for (int d = 0; d < 4; ++d) {
    CHECK(seq.matrix(0, d) == wv.row(wv.index.at("a"))[d]);
    CHECK(seq.matrix(1, d) == 0.0f);  // OOV row
    CHECK(seq.matrix(2, d) == 0.0f);  // padding row
  }

  auto empty = embed_sequence<float>(token_seq({}), wv, 2, 4);
  CHECK(empty.valid_len == 0);
  CHECK(empty.matrix.isZero());

  auto truncated =
      embed_sequence<float>(token_seq({"a", "b", "c", "d", "e"}), wv, 3, 4);
  CHECK(truncated.valid_len == 3);
  for (std::size_t t = 0; t < 3; ++t)
    for (int d = 0; d < 4; ++d)
      CHECK(truncated.matrix(static_cast<Eigen::Index>(t), d) ==
            wv.row(t)[d]);

  CHECK_THROWS_AS(embed_sequence<float>(token_seq({"a"}), wv, 2, 300),
                  DimensionMismatchError);
  CHECK_THROWS_AS(embed_sequence<float>(token_seq({"a"}), wv, 0, 4),
                  DimensionMismatchError);
}

TEST_CASE("lstm cell: zero-parameter algebra") {
  auto model = zero_model<double>(3, 2, 1);
  VecX<double> x(2), h0 = VecX<double>::Zero(3), c0 = VecX<double>::Zero(3);
  x << 0.7, -0.4;
  VecX<double> h, c;
  lstm_cell_forward(model.forward_params, x, h0, c0, h, c);
  CHECK(h.isZero(0.0));
  CHECK(c.isZero(0.0));

  // zero params, c_prev = 1: c = 0.5, h = 0.5 tanh(0.5)
  VecX<double> ones = VecX<double>::Ones(3);
  lstm_cell_forward(model.forward_params, x, h0, ones, h, c);
  for (int k = 0; k < 3; ++k) {
    CHECK(c[k] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h[k] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
  }
}

TEST_CASE("forward: zero-parameter model emits the dense bias") {
  auto model = zero_model<double>(2, 3, 4);
  model.dense_b = 0.125;
  Rng rng(5);
  auto seq = random_sequence<double>(4, 3, rng);
  CHECK(blstm_forward<double>(model, seq, nullptr) == 0.125);
}

TEST_CASE("forward: H=1, L=2 hand evaluation") {
  BlstmModelT<double> model;
  model.config = tiny_config(1, 2, 2, BlstmVariant::Slstm, 0);
  // distinct non-round values per weight
  ScalarLstm fwd{{0.1, -0.2}, {0.3, 0.05}, {-0.4, 0.25}, {0.15, -0.1},
                 0.2, -0.3, 0.1, 0.4,
                 0.01, 1.0, -0.02, 0.03};
  ScalarLstm bwd{{-0.12, 0.22}, {0.08, -0.18}, {0.33, -0.07}, {-0.25, 0.19},
                 -0.15, 0.27, 0.05, -0.09,
                 0.02, 1.0, 0.04, -0.01};

  auto fill = [](const ScalarLstm& s, LstmDirectionParamsT<double>& p) {
    p.W.resize(4, 2);
    p.U.resize(4, 1);
    p.b.resize(4);
    p.W << s.Wi[0], s.Wi[1], s.Wf[0], s.Wf[1], s.Wg[0], s.Wg[1], s.Wo[0],
        s.Wo[1];
    p.U << s.Ui, s.Uf, s.Ug, s.Uo;
    p.b << s.bi, s.bf, s.bg, s.bo;
  };
  fill(fwd, model.forward_params);
  fill(bwd, model.backward_params);
  model.dense_w.resize(2);
  model.dense_w << 0.6, -0.35;
  model.dense_b = 0.05;

  PaddedSequenceT<double> seq;
  seq.matrix.resize(2, 2);
  seq.matrix << 0.5, -0.7, 0.2, 0.9;
  seq.valid_len = 2;

  // independent scalar evaluation
  const double x0[2] = {0.5, -0.7}, x1[2] = {0.2, 0.9};
  double hf = 0, cf = 0;
  fwd.step(x0, hf, cf);
  fwd.step(x1, hf, cf);
  double hb = 0, cb = 0;
  bwd.step(x1, hb, cb);
  bwd.step(x0, hb, cb);
  const double expected = 0.6 * hf - 0.35 * hb + 0.05;

  CHECK(blstm_forward<double>(model, seq, nullptr) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("inference purity and matrix-content determinism") {
  Rng rng(9);
  BlstmConfig cfg = tiny_config(4, 6, 3, BlstmVariant::Slstm, 42);
  Rng init(derive_seed(42, "init"));
  auto model = init_blstm_model<float>(cfg, init);
  auto seq = random_sequence<float>(3, 6, rng);

  const float s1 = blstm_forward<float>(model, seq, nullptr);
  const float s2 = blstm_forward<float>(model, seq, nullptr);
  CHECK(s1 == s2);

  PaddedSequenceT<float> copy;
  copy.matrix = seq.matrix;
  copy.valid_len = 1;  // different valid_len, same content
  CHECK(blstm_forward<float>(model, copy, nullptr) == s1);
}

TEST_CASE("mse_loss") {
  CHECK(mse_loss({1, 0}, {1, 0}) == 0.0);
  CHECK(mse_loss({1}, {0}) == 1.0);
  CHECK(mse_loss({0.5, -0.5}, {0, 0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(mse_loss({}, {}), EmptyBatchError);
  CHECK_THROWS_AS(mse_loss({1}, {1, 2}), DimensionMismatchError);
}

TEST_CASE("backward: stationary point at the all-zero model") {
  auto model = zero_model<double>(2, 3, 2);
  Rng rng(3);
  auto seq = random_sequence<double>(2, 3, rng);
  ForwardCacheT<double> cache;
  blstm_forward<double>(model, seq, nullptr, &cache);
  auto grads = blstm_backward<double>(model, {&seq}, {0.0}, {&cache},
                                      {nullptr});
  CHECK(grads.forward_params.W.isZero(0.0));
  CHECK(grads.forward_params.U.isZero(0.0));
  CHECK(grads.backward_params.b.isZero(0.0));
  CHECK(grads.dense_w.isZero(0.0));
  CHECK(grads.dense_b == 0.0);
}

TEST_CASE("backward: duplicated batch equals single sample") {
  BlstmConfig cfg = tiny_config(3, 5, 4, BlstmVariant::Slstm, 8);
  Rng init(derive_seed(8, "init"));
  auto model = init_blstm_model<double>(cfg, init);
  Rng rng(12);
  auto seq = random_sequence<double>(4, 5, rng);

  ForwardCacheT<double> c1, c2, c3;
  blstm_forward<double>(model, seq, nullptr, &c1);
  blstm_forward<double>(model, seq, nullptr, &c2);
  blstm_forward<double>(model, seq, nullptr, &c3);
  auto single = blstm_backward<double>(model, {&seq}, {0.4}, {&c1}, {nullptr});
  auto triple =
      blstm_backward<double>(model, {&seq, &seq, &seq}, {0.4, 0.4, 0.4},
                             {&c1, &c2, &c3}, {nullptr, nullptr, nullptr});
  CHECK((single.forward_params.W - triple.forward_params.W).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((single.backward_params.U - triple.backward_params.U).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((single.dense_w - triple.dense_w).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(single.dense_b == doctest::Approx(triple.dense_b).epsilon(1e-12));
}

TEST_CASE("backward: cache mismatch errors") {
  auto model = zero_model<double>(2, 3, 2);
  Rng rng(3);
  auto seq = random_sequence<double>(2, 3, rng);
  ForwardCacheT<double> cache;  // never filled
  CHECK_THROWS_AS(blstm_backward<double>(model, {&seq}, {0.0}, {&cache},
                                         {nullptr}),
                  CacheMismatchError);
  CHECK_THROWS_AS(
      blstm_backward<double>(model, {}, {}, {}, {}), EmptyBatchError);
}

TEST_CASE("gradient check across 10 random seeds") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BlstmConfig cfg = tiny_config(1 + seed % 4, 10, 2 + seed % 4,
                                  BlstmVariant::Slstm, seed);
    Rng init(derive_seed(seed, "init"));
    auto model = init_blstm_model<double>(cfg, init);
    Rng rng(seed * 31);
    std::vector<std::pair<PaddedSequenceT<double>, double>> batch;
    batch.emplace_back(random_sequence<double>(cfg.max_len, 10, rng),
                       rng.uniform(-1, 1));
    batch.emplace_back(random_sequence<double>(cfg.max_len, 10, rng),
                       rng.uniform(-1, 1));
    const double err = gradient_check(model, batch, 1e-5);
    CAPTURE(seed);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gradient check: zero-gradient fixture reports exactly zero") {
  // all-zero model and zero targets sit at a stationary point; the
  // stabilized denominator keeps 0/0 at 0
  auto model = zero_model<double>(2, 4, 3);
  Rng rng(14);
  std::vector<std::pair<PaddedSequenceT<double>, double>> batch;
  batch.emplace_back(random_sequence<double>(3, 4, rng), 0.0);
  batch.emplace_back(random_sequence<double>(3, 4, rng), 0.0);
  CHECK(gradient_check(model, batch, 1e-5) == 0.0);
}

TEST_CASE("backward is exact through fixed dropout masks") {
  // gradient_check runs dropout-off; this pins the mask paths: analytic
  // gradients of the masked loss must match finite differences of the
  // same masked loss
  for (auto variant : {BlstmVariant::Slstm, BlstmVariant::Elstm}) {
    BlstmConfig cfg = tiny_config(3, 6, 4, variant, 17);
    Rng init(derive_seed(17, "init"));
    auto model = init_blstm_model<double>(cfg, init);
    Rng mask_rng(derive_seed(17, "dropout"));
    DropoutMasksT<double> masks = make_dropout_masks<double>(cfg, mask_rng);

    Rng rng(18);
    auto seq = random_sequence<double>(4, 6, rng);
    const double target = -0.2;

    ForwardCacheT<double> cache;
    blstm_forward<double>(model, seq, &masks, &cache);
    auto grads =
        blstm_backward<double>(model, {&seq}, {target}, {&cache}, {&masks});

    auto masked_loss = [&](const BlstmModelT<double>& m) {
      const double pred = blstm_forward<double>(m, seq, &masks, nullptr);
      return (pred - target) * (pred - target);
    };
    const double h = 1e-6;
    double worst = 0.0;
    auto probe_block = [&](auto getter, const double* grad, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) {
        auto probe = model;
        getter(probe)[i] += h;
        const double up = masked_loss(probe);
        getter(probe)[i] -= 2 * h;
        const double down = masked_loss(probe);
        const double numeric = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(grad[i] - numeric) /
                                    std::max({std::abs(grad[i]),
                                              std::abs(numeric), 1e-6}));
      }
    };
    probe_block([](auto& m) -> double* { return m.forward_params.U.data(); },
                grads.forward_params.U.data(),
                static_cast<std::size_t>(model.forward_params.U.size()));
    probe_block([](auto& m) -> double* { return m.backward_params.b.data(); },
                grads.backward_params.b.data(),
                static_cast<std::size_t>(model.backward_params.b.size()));
    probe_block([](auto& m) -> double* { return m.dense_w.data(); },
                grads.dense_w.data(),
                static_cast<std::size_t>(model.dense_w.size()));
    CAPTURE(static_cast<int>(variant));
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("gradient check negative control: corrupted gradient is flagged") {
  BlstmConfig cfg = tiny_config(3, 8, 3, BlstmVariant::Slstm, 99);
  Rng init(derive_seed(99, "init"));
  auto model = init_blstm_model<double>(cfg, init);
  Rng rng(100);
  auto seq = random_sequence<double>(3, 8, rng);
  const double target = 0.3;

  ForwardCacheT<double> cache;
  blstm_forward<double>(model, seq, nullptr, &cache);
  auto grads =
      blstm_backward<double>(model, {&seq}, {target}, {&cache}, {nullptr});

  // numeric derivative for one dense weight
  auto probe = model;
  const double h = 1e-5;
  auto loss = [&](double delta) {
    probe.dense_w[0] = model.dense_w[0] + delta;
    double pred = blstm_forward<double>(probe, seq, nullptr);
    return (pred - target) * (pred - target);
  };
  const double numeric = (loss(h) - loss(-h)) / (2 * h);
  const double analytic = grads.dense_w[0];
  CHECK(std::abs(analytic - numeric) /
            std::max({std::abs(analytic), std::abs(numeric), 1e-8}) <
        1e-6);
  const double corrupted = analytic * 1.1;
  CHECK(std::abs(corrupted - numeric) /
            std::max({std::abs(corrupted), std::abs(numeric), 1e-8}) >
        1e-2);
}

TEST_CASE("clip_gradients clamps exactly") {
  auto model = zero_model<float>(2, 3, 2);
  BlstmGradientsT<float> g;
  g.forward_params.W = MatX<float>::Constant(8, 3, 7.2f);
  g.forward_params.U = MatX<float>::Constant(8, 2, -9.0f);
  g.forward_params.b = VecX<float>::Constant(8, -0.3f);
  g.backward_params.W = MatX<float>::Constant(8, 3, 4.999f);
  g.backward_params.U = MatX<float>::Constant(8, 2, 5.0f);
  g.backward_params.b = VecX<float>::Constant(8, 123.0f);
  g.dense_w = VecX<float>::Constant(4, -5.00001f);
  g.dense_b = 7.0f;
  clip_gradients(g, 5.0);
  CHECK(g.forward_params.W.maxCoeff() == 5.0f);
  CHECK(g.forward_params.U.minCoeff() == -5.0f);
  CHECK(g.forward_params.b.minCoeff() == -0.3f);  // unchanged, in range
  CHECK(g.backward_params.W.maxCoeff() == 4.999f);
  CHECK(g.backward_params.U.maxCoeff() == 5.0f);
  CHECK(g.backward_params.b.maxCoeff() == 5.0f);
  CHECK(g.dense_w.minCoeff() == -5.0f);
  CHECK(g.dense_b == 5.0f);
  for (const auto* m : {&g.forward_params.W, &g.backward_params.W}) {
    CHECK(m->maxCoeff() <= 5.0f);
    CHECK(m->minCoeff() >= -5.0f);
  }
}

TEST_CASE("rmsprop: one-step arithmetic and two-step unroll") {
  auto model = zero_model<float>(1, 1, 1);
  RmsStateT<float> state;
  state.forward_params.W = MatX<float>::Zero(4, 1);
  state.forward_params.U = MatX<float>::Zero(4, 1);
  state.forward_params.b = VecX<float>::Zero(4);
  state.backward_params = state.forward_params;
  state.dense_w = VecX<float>::Zero(2);
  state.dense_b = 0;

  BlstmGradientsT<float> g;
  g.forward_params.W = MatX<float>::Zero(4, 1);
  g.forward_params.U = MatX<float>::Zero(4, 1);
  g.forward_params.b = VecX<float>::Zero(4);
  g.backward_params = g.forward_params;
  g.dense_w = VecX<float>::Zero(2);
  g.dense_b = 1.0f;

  rmsprop_step(model, g, state, 0.001, 0.9, 1e-8);
  CHECK(state.dense_b == doctest::Approx(0.1).epsilon(1e-6));
  const double step1 = -0.001 * 1.0 / (std::sqrt(0.1) + 1e-8);
  CHECK(model.dense_b == doctest::Approx(step1).epsilon(1e-5));
  CHECK(model.dense_w.isZero(0.0f));  // zero gradient leaves params alone

  rmsprop_step(model, g, state, 0.001, 0.9, 1e-8);
  const double v2 = 0.9 * 0.1 + 0.1 * 1.0;
  const double step2 = step1 - 0.001 * 1.0 / (std::sqrt(v2) + 1e-8);
  CHECK(state.dense_b == doctest::Approx(v2).epsilon(1e-6));
  CHECK(model.dense_b == doctest::Approx(step2).epsilon(1e-5));
}

TEST_CASE("inverted dropout: mask expectation is the identity within 2%") {
  BlstmConfig cfg = tiny_config(4, 3, 50, BlstmVariant::Slstm, 77);
  Rng rng(derive_seed(77, "dropout"));
  VecX<double> mean = VecX<double>::Zero(50);
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    auto masks = make_dropout_masks<double>(cfg, rng);
    mean += masks.input_rows;
  }
  mean /= trials;
  for (int r = 0; r < 50; ++r) {
    CHECK(std::abs(mean[r] - 1.0) <= 0.02);
  }
}

TEST_CASE("early stopper: scripted validation trace") {
  // [.5, .4, then ten non-improving]: stop at epoch 12, best epoch 2
  EarlyStopper stopper(10);
  CHECK(!stopper.observe(0.5));
  CHECK(!stopper.observe(0.4));
  for (int epoch = 3; epoch <= 11; ++epoch) {
    CHECK(!stopper.observe(0.4));
  }
  CHECK(stopper.observe(0.4));  // 10th non-improving epoch = epoch 12
  CHECK(stopper.best_epoch() == 2);

  // strictly improving never stops
  EarlyStopper eager(3);
  for (int epoch = 1; epoch <= 50; ++epoch) {
    CHECK(!eager.observe(1.0 / epoch));
  }
  CHECK(eager.best_epoch() == 50);
}

namespace {

std::vector<LabeledTokens> overfit_set() {
  // one distinctive cue token per headline; the target follows the cue
  std::vector<LabeledTokens> data;
  for (int i = 0; i < 16; ++i) {
    std::string cue = "cue" + std::to_string(i);
    double target = -1.0 + 2.0 * (static_cast<double>(i) / 15.0);
    data.emplace_back(token_seq({"the", cue, "headline"}), target);
  }
  return data;
}

std::vector<std::string> overfit_vocab() {
  std::vector<std::string> words = {"the", "headline"};
  for (int i = 0; i < 16; ++i) words.push_back("cue" + std::to_string(i));
  return words;
}

}  // namespace

TEST_CASE("slstm training: determinism and lr=0") {
  WordVectors wv = tiny_embeddings(12, 5, overfit_vocab());
  auto data = overfit_set();

  BlstmConfig cfg = tiny_config(6, 12, 0, BlstmVariant::Slstm, 123);
  cfg.epochs = 3;
  cfg.batch_size = 4;

  BlstmModel a = train_slstm(data, wv, cfg);
  BlstmModel b = train_slstm(data, wv, cfg);
  CHECK(a.forward_params.W == b.forward_params.W);
  CHECK(a.backward_params.U == b.backward_params.U);
  CHECK(a.dense_w == b.dense_w);
  CHECK(a.dense_b == b.dense_b);
  CHECK(a.config.max_len == 3);  // longest training sentence

  BlstmConfig frozen = cfg;
  frozen.learning_rate = 0.0;
  BlstmModel c = train_slstm(data, wv, frozen);
  Rng init(derive_seed(frozen.seed, "init"));
  frozen.max_len = 3;
  BlstmModel untouched = init_blstm_model<float>(frozen, init);
  CHECK(c.forward_params.W == untouched.forward_params.W);
  CHECK(c.dense_w == untouched.dense_w);

  CHECK_THROWS_AS(train_slstm({}, wv, cfg), EmptyDatasetError);
}

TEST_CASE("slstm training: loss falls on the overfit fixture") {
  WordVectors wv = tiny_embeddings(12, 5, overfit_vocab());
  auto data = overfit_set();

  BlstmConfig cfg = tiny_config(16, 12, 0, BlstmVariant::Slstm, 321);
  cfg.epochs = 60;
  cfg.batch_size = 4;

  TrainHistory history;
  train_slstm(data, wv, cfg, &history);
  REQUIRE(history.train_mse.size() == 60);
  CHECK(history.train_mse.back() < history.train_mse.front());
}

TEST_CASE("elstm training: early stopping and best-epoch weights") {
  WordVectors wv = tiny_embeddings(12, 5, overfit_vocab());
  auto all = overfit_set();
  std::vector<LabeledTokens> train(all.begin(), all.end() - 4);
  std::vector<LabeledTokens> val(all.end() - 4, all.end());

  BlstmConfig cfg = tiny_config(6, 12, 0, BlstmVariant::Elstm, 55);
  cfg.epochs = 30;
  cfg.patience = 5;
  cfg.batch_size = 4;

  TrainHistory history;
  BlstmModel model = train_elstm(train, val, wv, cfg, &history);
  REQUIRE(history.stopped_epoch >= 1);
  CHECK(history.stopped_epoch <= 30);
  CHECK(history.best_epoch >= 1);
  CHECK(history.best_epoch <= history.stopped_epoch);
  REQUIRE(history.val_mse.size() ==
          static_cast<std::size_t>(history.stopped_epoch));
  // returned weights are the best-validation-epoch weights
  double best = *std::min_element(history.val_mse.begin(), history.val_mse.end());
  CHECK(history.val_mse[history.best_epoch - 1] ==
        doctest::Approx(best).epsilon(1e-12));

  TrainHistory again;
  BlstmModel model2 = train_elstm(train, val, wv, cfg, &again);
  CHECK(again.stopped_epoch == history.stopped_epoch);
  CHECK(model.dense_w == model2.dense_w);
  CHECK(model.forward_params.W == model2.forward_params.W);

  CHECK_THROWS_AS(train_elstm(train, {}, wv, cfg), EmptyDatasetError);
}

TEST_CASE("blstm model binary round-trip") {
  WordVectors wv = tiny_embeddings(12, 5, overfit_vocab());
  auto data = overfit_set();
  BlstmConfig cfg = tiny_config(5, 12, 0, BlstmVariant::Slstm, 9);
  cfg.epochs = 2;
  BlstmModel model = train_slstm(data, wv, cfg);

  const std::string path =
      (std::filesystem::temp_directory_path() / "finsent_blstm_rt.bin")
          .string();
  save_blstm_model(path, model);
  BlstmModel back = load_blstm_model(path);
  std::filesystem::remove(path);

  CHECK(back.config.hidden == model.config.hidden);
  CHECK(back.config.max_len == model.config.max_len);
  CHECK(back.forward_params.W == model.forward_params.W);
  CHECK(back.forward_params.b == model.forward_params.b);
  CHECK(back.backward_params.U == model.backward_params.U);
  CHECK(back.dense_w == model.dense_w);
  CHECK(back.dense_b == model.dense_b);
}
