#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "finsent/embeddings.hpp"
#include "finsent/errors.hpp"
#include "finsent/rng.hpp"
#include "finsent/tokenize.hpp"

namespace finsent {

enum class BlstmVariant { Slstm, Elstm };

// SLSTM: fixed epochs, 0.2 input dropout + 0.2 recurrent dropout.
// ELSTM: early stopping, 0.5 dropout between layers only.
inline constexpr double kSlstmInputDropout = 0.2;
inline constexpr double kSlstmRecurrentDropout = 0.2;
inline constexpr double kElstmLayerDropout = 0.5;

struct BlstmConfig {
  std::size_t max_len = 0;  // 0: longest training sentence, in tokens
  std::size_t embed_dim = 300;
  std::size_t hidden = 100;  // per-direction hidden size
  BlstmVariant variant = BlstmVariant::Slstm;
  double clip_value = 5.0;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  double rms_decay = 0.9;
  double rms_eps = 1e-8;
  int epochs = 25;          // fixed run (SLSTM) or cap (ELSTM)
  int patience = 10;        // ELSTM early stopping
  double val_fraction = 0.1;  // ELSTM validation share, split by the caller
  std::uint64_t seed = 0;
};

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Gate rows stacked input | forget | cell | output.
template <typename T>
struct LstmDirectionParamsT {
  MatX<T> W;  // 4H x embed_dim
  MatX<T> U;  // 4H x H
  VecX<T> b;  // 4H
};

template <typename T>
struct BlstmModelT {
  LstmDirectionParamsT<T> forward_params;
  LstmDirectionParamsT<T> backward_params;
  VecX<T> dense_w;  // 2H, consumes [forward final h ; backward final h]
  T dense_b = 0;
  BlstmConfig config;
};
using BlstmModel = BlstmModelT<float>;

template <typename T>
struct PaddedSequenceT {
  MatX<T> matrix;  // max_len x embed_dim, one row per time step
  std::size_t valid_len = 0;
};
using PaddedSequence = PaddedSequenceT<float>;

// Inverted-dropout masks, entries in {0, 1/keep}. Empty vector = no dropout
// at that site. Draw order: input rows, then recurrent forward/backward
// (SLSTM) or the dense-input mask (ELSTM).
template <typename T>
struct DropoutMasksT {
  VecX<T> input_rows;    // max_len
  VecX<T> recur_forward;  // H
  VecX<T> recur_backward; // H
  VecX<T> dense;          // 2H
};

template <typename T>
struct DirectionCacheT {
  MatX<T> gates;    // 4H x L, post-activation
  MatX<T> c;        // H x L
  MatX<T> h;        // H x L
  MatX<T> h_tilde;  // H x L, (masked) h_prev fed to the gates at step t
};

template <typename T>
struct ForwardCacheT {
  MatX<T> input;          // L x E after input dropout
  DirectionCacheT<T> fwd;
  DirectionCacheT<T> bwd;
  VecX<T> concat_dropped;  // 2H, what the dense layer consumed
  T score = 0;
  bool valid = false;
};

template <typename T>
struct BlstmGradientsT {
  LstmDirectionParamsT<T> forward_params;
  LstmDirectionParamsT<T> backward_params;
  VecX<T> dense_w;
  T dense_b = 0;
};
using BlstmGradients = BlstmGradientsT<float>;

// RMSprop accumulators; training state only, never serialized.
template <typename T>
struct RmsStateT {
  LstmDirectionParamsT<T> forward_params;
  LstmDirectionParamsT<T> backward_params;
  VecX<T> dense_w;
  T dense_b = 0;
};

struct TrainHistory {
  std::vector<double> train_mse;  // epoch-end, dropout off
  std::vector<double> val_mse;    // ELSTM only
  int best_epoch = 0;             // 1-based; ELSTM only
  int stopped_epoch = 0;          // epochs actually run
};

// Tracks the best validation loss; stop after `patience` consecutive
// epochs without strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Returns true when training should stop after this observation.
  bool observe(double loss) {
    ++epoch_;
    if (loss < best_loss_) {
      best_loss_ = loss;
      best_epoch_ = epoch_;
      streak_ = 0;
      return false;
    }
    return ++streak_ >= patience_;
  }
  bool last_improved() const { return streak_ == 0; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int streak_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

namespace detail {

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace detail

// First min(|tokens|, L) rows are embedding lookups (zeros for OOV), the
// rest zero padding; longer inputs are truncated on the right.
template <typename T = float>
PaddedSequenceT<T> embed_sequence(const TokenSequence& tokens,
                                  const WordVectors& wv, std::size_t max_len,
                                  std::size_t embed_dim) {
  if (max_len < 1)
    throw DimensionMismatchError("sequence length must be >= 1");
  if (wv.dim != embed_dim)
    throw DimensionMismatchError("embedding model dim " +
                                 std::to_string(wv.dim) + " != configured " +
                                 std::to_string(embed_dim));
  PaddedSequenceT<T> seq;
  seq.matrix = MatX<T>::Zero(static_cast<Eigen::Index>(max_len),
                             static_cast<Eigen::Index>(embed_dim));
  seq.valid_len = std::min(tokens.tokens.size(), max_len);
  for (std::size_t t = 0; t < seq.valid_len; ++t) {
    if (const float* v = wv.lookup(tokens.tokens[t])) {
      for (std::size_t d = 0; d < embed_dim; ++d)
        seq.matrix(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) =
            static_cast<T>(v[d]);
    }
  }
  return seq;
}

// One step of the standard LSTM recurrence:
//   a = W x + U h_prev + b;  i,f,o = sigmoid, g = tanh
//   c = f . c_prev + i . g;  h = o . tanh(c)
template <typename T>
void lstm_cell_forward(const LstmDirectionParamsT<T>& p, const VecX<T>& x_t,
                       const VecX<T>& h_prev, const VecX<T>& c_prev,
                       VecX<T>& h_out, VecX<T>& c_out,
                       VecX<T>* gates_out = nullptr) {
  const Eigen::Index H = p.U.cols();
  VecX<T> a = p.W * x_t + p.U * h_prev + p.b;
  for (Eigen::Index k = 0; k < 2 * H; ++k) a[k] = detail::sigmoid(a[k]);  // i, f
  for (Eigen::Index k = 2 * H; k < 3 * H; ++k) a[k] = std::tanh(a[k]);    // g
  for (Eigen::Index k = 3 * H; k < 4 * H; ++k) a[k] = detail::sigmoid(a[k]);  // o
  c_out = a.segment(H, H).cwiseProduct(c_prev) +
          a.head(H).cwiseProduct(a.segment(2 * H, H));
  h_out = a.tail(H).cwiseProduct(c_out.array().tanh().matrix());
  if (gates_out) *gates_out = std::move(a);
}

namespace detail {

// Runs one direction over the (already masked) input. step_of(k) maps the
// k-th processed step to a row index: identity for the forward direction,
// L-1-k for the backward one.
template <typename T, typename StepMap>
void run_direction(const LstmDirectionParamsT<T>& p, const MatX<T>& input,
                   const VecX<T>& recur_mask, StepMap step_of,
                   DirectionCacheT<T>& cache) {
  const Eigen::Index H = p.U.cols();
  const Eigen::Index L = input.rows();
  cache.gates.resize(4 * H, L);
  cache.c.resize(H, L);
  cache.h.resize(H, L);
  cache.h_tilde.resize(H, L);
  VecX<T> h = VecX<T>::Zero(H), c = VecX<T>::Zero(H), gates;
  for (Eigen::Index k = 0; k < L; ++k) {
    const Eigen::Index t = step_of(k);
    VecX<T> h_in =
        recur_mask.size() ? h.cwiseProduct(recur_mask).eval() : h;
    VecX<T> x_t = input.row(t).transpose();
    VecX<T> h_next, c_next;
    lstm_cell_forward(p, x_t, h_in, c, h_next, c_next, &gates);
    cache.gates.col(t) = gates;
    cache.h_tilde.col(t) = h_in;
    cache.c.col(t) = c_next;
    cache.h.col(t) = h_next;
    h = std::move(h_next);
    c = std::move(c_next);
  }
}

}  // namespace detail

// Full forward pass. masks == nullptr means inference (no dropout).
// A cache is required for blstm_backward.
template <typename T>
T blstm_forward(const BlstmModelT<T>& model, const PaddedSequenceT<T>& seq,
                const DropoutMasksT<T>* masks,
                ForwardCacheT<T>* cache = nullptr) {
  const Eigen::Index H = model.forward_params.U.cols();
  const Eigen::Index L = seq.matrix.rows();

  MatX<T> input = seq.matrix;
  if (masks && masks->input_rows.size())
    input = masks->input_rows.asDiagonal() * input;

  static const VecX<T> kNoMask;
  const VecX<T>& mf = masks && masks->recur_forward.size()
                          ? masks->recur_forward
                          : kNoMask;
  const VecX<T>& mb = masks && masks->recur_backward.size()
                          ? masks->recur_backward
                          : kNoMask;

  ForwardCacheT<T> local;
  ForwardCacheT<T>& cc = cache ? *cache : local;
  detail::run_direction(model.forward_params, input, mf,
                        [](Eigen::Index k) { return k; }, cc.fwd);
  detail::run_direction(model.backward_params, input, mb,
                        [L](Eigen::Index k) { return L - 1 - k; }, cc.bwd);

  // Final states: forward at the last row, backward at the first.
  VecX<T> concat(2 * H);
  concat.head(H) = cc.fwd.h.col(L - 1);
  concat.tail(H) = cc.bwd.h.col(0);
  if (masks && masks->dense.size())
    concat = concat.cwiseProduct(masks->dense);

  T score = model.dense_w.dot(concat) + model.dense_b;
  if (cache) {
    cc.input = std::move(input);
    cc.concat_dropped = std::move(concat);
    cc.score = score;
    cc.valid = true;
  }
  return score;
}

// Convenience wrapper matching the train-mode contract: draws the
// variant's dropout masks from rng when train_mode is set.
template <typename T>
DropoutMasksT<T> make_dropout_masks(const BlstmConfig& cfg, Rng& rng) {
  DropoutMasksT<T> m;
  auto draw = [&rng](VecX<T>& v, Eigen::Index n, double p) {
    v.resize(n);
    const T inv_keep = static_cast<T>(1.0 / (1.0 - p));
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = rng.bernoulli(p) ? T(0) : inv_keep;
  };
  const auto L = static_cast<Eigen::Index>(cfg.max_len);
  const auto H = static_cast<Eigen::Index>(cfg.hidden);
  if (cfg.variant == BlstmVariant::Slstm) {
    draw(m.input_rows, L, kSlstmInputDropout);
    draw(m.recur_forward, H, kSlstmRecurrentDropout);
    draw(m.recur_backward, H, kSlstmRecurrentDropout);
  } else {
    draw(m.input_rows, L, kElstmLayerDropout);
    draw(m.dense, 2 * H, kElstmLayerDropout);
  }
  return m;
}

template <typename T>
T blstm_forward(const BlstmModelT<T>& model, const PaddedSequenceT<T>& seq,
                bool train_mode, Rng& rng) {
  if (!train_mode) return blstm_forward<T>(model, seq, nullptr, nullptr);
  DropoutMasksT<T> masks = make_dropout_masks<T>(model.config, rng);
  return blstm_forward<T>(model, seq, &masks, nullptr);
}

double mse_loss(const std::vector<double>& predictions,
                const std::vector<double>& targets);

namespace detail {

template <typename T>
void zero_like(const BlstmModelT<T>& model, BlstmGradientsT<T>& g) {
  auto zero_dir = [](const LstmDirectionParamsT<T>& p,
                     LstmDirectionParamsT<T>& out) {
    out.W = MatX<T>::Zero(p.W.rows(), p.W.cols());
    out.U = MatX<T>::Zero(p.U.rows(), p.U.cols());
    out.b = VecX<T>::Zero(p.b.size());
  };
  zero_dir(model.forward_params, g.forward_params);
  zero_dir(model.backward_params, g.backward_params);
  g.dense_w = VecX<T>::Zero(model.dense_w.size());
  g.dense_b = 0;
}

// BPTT through one direction; dh_final seeds the gradient at the
// direction's last processed step. Accumulates into dp, returns nothing.
template <typename T, typename StepMap>
void direction_backward(const LstmDirectionParamsT<T>& p,
                        const DirectionCacheT<T>& cache, const MatX<T>& input,
                        const VecX<T>& recur_mask, StepMap step_of,
                        const VecX<T>& dh_final,
                        LstmDirectionParamsT<T>& dp) {
  const Eigen::Index H = p.U.cols();
  const Eigen::Index L = input.rows();
  VecX<T> dh = dh_final;
  VecX<T> dc = VecX<T>::Zero(H);
  for (Eigen::Index k = L - 1; k >= 0; --k) {
    const Eigen::Index t = step_of(k);
    const Eigen::Index t_prev = k > 0 ? step_of(k - 1) : -1;
    auto gi = cache.gates.col(t).head(H);
    auto gf = cache.gates.col(t).segment(H, H);
    auto gg = cache.gates.col(t).segment(2 * H, H);
    auto go = cache.gates.col(t).tail(H);
    VecX<T> tanh_c = cache.c.col(t).array().tanh().matrix();
    VecX<T> c_prev =
        t_prev >= 0 ? VecX<T>(cache.c.col(t_prev)) : VecX<T>::Zero(H);

    VecX<T> do_ = dh.cwiseProduct(tanh_c);
    dc += dh.cwiseProduct(go).cwiseProduct(
        (T(1) - tanh_c.array().square()).matrix());

    VecX<T> da(4 * H);
    da.head(H) = dc.cwiseProduct(gg).cwiseProduct(gi).cwiseProduct(
        (T(1) - gi.array()).matrix());
    da.segment(H, H) = dc.cwiseProduct(c_prev).cwiseProduct(gf).cwiseProduct(
        (T(1) - gf.array()).matrix());
    da.segment(2 * H, H) = dc.cwiseProduct(gi).cwiseProduct(
        (T(1) - gg.array().square()).matrix());
    da.tail(H) =
        do_.cwiseProduct(go).cwiseProduct((T(1) - go.array()).matrix());

    dp.W.noalias() += da * input.row(t);
    dp.U.noalias() += da * cache.h_tilde.col(t).transpose();
    dp.b += da;

    dh.noalias() = p.U.transpose() * da;
    if (recur_mask.size()) dh = dh.cwiseProduct(recur_mask);
    dc = dc.cwiseProduct(gf);
  }
}

}  // namespace detail

// Exact gradients of the batch MSE with respect to every parameter. Each
// cache must come from a forward call on the matching sequence, with the
// same masks it was trained under (masks[k] may be nullptr for none).
template <typename T>
BlstmGradientsT<T> blstm_backward(
    const BlstmModelT<T>& model,
    const std::vector<const PaddedSequenceT<T>*>& batch,
    const std::vector<double>& targets,
    const std::vector<const ForwardCacheT<T>*>& caches,
    const std::vector<const DropoutMasksT<T>*>& masks) {
  if (batch.empty()) throw EmptyBatchError("empty batch");
  if (batch.size() != targets.size() || batch.size() != caches.size() ||
      batch.size() != masks.size())
    throw CacheMismatchError("batch/targets/caches size mismatch");
  for (const auto* c : caches) {
    if (!c || !c->valid) throw CacheMismatchError("missing forward cache");
  }

  const Eigen::Index H = model.forward_params.U.cols();
  const Eigen::Index L = batch[0]->matrix.rows();
  BlstmGradientsT<T> g;
  detail::zero_like(model, g);
  static const VecX<T> kNoMask;

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const ForwardCacheT<T>& cc = *caches[k];
    const T dscore = static_cast<T>(
        2.0 * (static_cast<double>(cc.score) - targets[k]) * inv_b);

    g.dense_w += dscore * cc.concat_dropped;
    g.dense_b += dscore;

    VecX<T> dconcat = dscore * model.dense_w;
    if (masks[k] && masks[k]->dense.size())
      dconcat = dconcat.cwiseProduct(masks[k]->dense);

    const VecX<T>& mf = masks[k] && masks[k]->recur_forward.size()
                            ? masks[k]->recur_forward
                            : kNoMask;
    const VecX<T>& mb = masks[k] && masks[k]->recur_backward.size()
                            ? masks[k]->recur_backward
                            : kNoMask;
    detail::direction_backward(
        model.forward_params, cc.fwd, cc.input, mf,
        [](Eigen::Index s) { return s; }, VecX<T>(dconcat.head(H)),
        g.forward_params);
    detail::direction_backward(
        model.backward_params, cc.bwd, cc.input, mb,
        [L](Eigen::Index s) { return L - 1 - s; }, VecX<T>(dconcat.tail(H)),
        g.backward_params);
  }
  return g;
}

// Element-wise clamp of every gradient entry to [-clip_value, clip_value].
template <typename T>
void clip_gradients(BlstmGradientsT<T>& g, double clip_value) {
  const T c = static_cast<T>(clip_value);
  auto clamp = [c](auto& m) { m = m.cwiseMin(c).cwiseMax(-c); };
  clamp(g.forward_params.W);
  clamp(g.forward_params.U);
  clamp(g.forward_params.b);
  clamp(g.backward_params.W);
  clamp(g.backward_params.U);
  clamp(g.backward_params.b);
  clamp(g.dense_w);
  g.dense_b = std::clamp(g.dense_b, -c, c);
}

// v <- decay v + (1-decay) g^2 ; p <- p - lr g / (sqrt(v) + eps)
template <typename T>
void rmsprop_step(BlstmModelT<T>& model, const BlstmGradientsT<T>& g,
                  RmsStateT<T>& state, double lr, double decay, double eps) {
  const T a = static_cast<T>(decay), one_m = static_cast<T>(1.0 - decay);
  const T step = static_cast<T>(lr), e = static_cast<T>(eps);
  auto upd = [&](auto& param, const auto& grad, auto& v) {
    v = a * v + one_m * grad.array().square().matrix();
    param -= step *
             (grad.array() / (v.array().sqrt() + e)).matrix();
  };
  upd(model.forward_params.W, g.forward_params.W, state.forward_params.W);
  upd(model.forward_params.U, g.forward_params.U, state.forward_params.U);
  upd(model.forward_params.b, g.forward_params.b, state.forward_params.b);
  upd(model.backward_params.W, g.backward_params.W, state.backward_params.W);
  upd(model.backward_params.U, g.backward_params.U, state.backward_params.U);
  upd(model.backward_params.b, g.backward_params.b, state.backward_params.b);
  upd(model.dense_w, g.dense_w, state.dense_w);
  state.dense_b = a * state.dense_b + one_m * g.dense_b * g.dense_b;
  model.dense_b -= step * g.dense_b / (std::sqrt(state.dense_b) + e);
}

// Glorot-style uniform init; forget-gate biases start at 1.
template <typename T>
BlstmModelT<T> init_blstm_model(const BlstmConfig& cfg, Rng& rng);

extern template BlstmModelT<float> init_blstm_model<float>(const BlstmConfig&,
                                                           Rng&);
extern template BlstmModelT<double> init_blstm_model<double>(const BlstmConfig&,
                                                             Rng&);

using LabeledTokens = std::pair<TokenSequence, double>;

// Fixed-epoch training (dropout 0.2 on input rows and recurrent
// connections). Deterministic for a fixed cfg.seed.
BlstmModel train_slstm(const std::vector<LabeledTokens>& train,
                       const WordVectors& wv, BlstmConfig cfg,
                       TrainHistory* history = nullptr);

// Early-stopped training (0.5 dropout between layers only); returns the
// best-validation-epoch parameters.
BlstmModel train_elstm(const std::vector<LabeledTokens>& train,
                       const std::vector<LabeledTokens>& val,
                       const WordVectors& wv, BlstmConfig cfg,
                       TrainHistory* history = nullptr);

// Central-difference check of blstm_backward over every parameter of a
// small model; returns max_k |analytic - numeric| / max(|a|,|n|,1e-8).
// Dropout is off; meant for the double instantiation.
double gradient_check(
    const BlstmModelT<double>& model,
    const std::vector<std::pair<PaddedSequenceT<double>, double>>& batch,
    double step);

BlstmModelT<double> model_to_double(const BlstmModel& model);

void save_blstm_model(const std::string& path, const BlstmModel& model);
BlstmModel load_blstm_model(const std::string& path);

}  // namespace finsent
