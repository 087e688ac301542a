#include "finsent/blstm.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace finsent {
namespace {

template <typename T>
void init_direction(LstmDirectionParamsT<T>& p, std::size_t hidden,
                    std::size_t embed_dim, Rng& rng) {
  const auto H = static_cast<Eigen::Index>(hidden);
  const auto E = static_cast<Eigen::Index>(embed_dim);
  const double wb = std::sqrt(6.0 / static_cast<double>(embed_dim + 4 * hidden));
  const double ub = std::sqrt(6.0 / static_cast<double>(hidden + 4 * hidden));
  p.W.resize(4 * H, E);
  for (Eigen::Index r = 0; r < p.W.rows(); ++r)
    for (Eigen::Index c = 0; c < p.W.cols(); ++c)
      p.W(r, c) = static_cast<T>(rng.uniform(-wb, wb));
  p.U.resize(4 * H, H);
  for (Eigen::Index r = 0; r < p.U.rows(); ++r)
    for (Eigen::Index c = 0; c < p.U.cols(); ++c)
      p.U(r, c) = static_cast<T>(rng.uniform(-ub, ub));
  p.b = VecX<T>::Zero(4 * H);
  p.b.segment(H, H).setConstant(T(1));  // forget gate bias
}

template <typename T>
void zero_state(const BlstmModelT<T>& model, RmsStateT<T>& s) {
  auto zero_dir = [](const LstmDirectionParamsT<T>& p,
                     LstmDirectionParamsT<T>& out) {
    out.W = MatX<T>::Zero(p.W.rows(), p.W.cols());
    out.U = MatX<T>::Zero(p.U.rows(), p.U.cols());
    out.b = VecX<T>::Zero(p.b.size());
  };
  zero_dir(model.forward_params, s.forward_params);
  zero_dir(model.backward_params, s.backward_params);
  s.dense_w = VecX<T>::Zero(model.dense_w.size());
  s.dense_b = 0;
}

double dataset_mse(const BlstmModel& model,
                   const std::vector<PaddedSequence>& seqs,
                   const std::vector<double>& targets) {
  std::vector<double> preds(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i)
    preds[i] = static_cast<double>(
        blstm_forward<float>(model, seqs[i], nullptr, nullptr));
  return mse_loss(preds, targets);
}

struct PreparedData {
  std::vector<PaddedSequence> seqs;
  std::vector<double> targets;
};

PreparedData prepare(const std::vector<LabeledTokens>& data,
                     const WordVectors& wv, const BlstmConfig& cfg) {
  PreparedData out;
  out.seqs.reserve(data.size());
  out.targets.reserve(data.size());
  for (const auto& [tokens, target] : data) {
    out.seqs.push_back(embed_sequence<float>(tokens, wv, cfg.max_len,
                                             cfg.embed_dim));
    out.targets.push_back(target);
  }
  return out;
}

std::size_t resolve_max_len(const std::vector<LabeledTokens>& train,
                            const BlstmConfig& cfg) {
  if (cfg.max_len > 0) return cfg.max_len;
  std::size_t longest = 1;
  for (const auto& [tokens, target] : train)
    longest = std::max(longest, tokens.tokens.size());
  return longest;
}

void run_epoch(BlstmModel& model, RmsStateT<float>& rms,
               const PreparedData& data, const BlstmConfig& cfg,
               Rng& shuffle_rng, Rng& dropout_rng,
               std::vector<std::size_t>& order) {
  shuffle_rng.shuffle(order);
  const std::size_t n = order.size();
  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t stop = std::min(n, start + cfg.batch_size);
    const std::size_t bsize = stop - start;

    std::vector<DropoutMasksT<float>> masks(bsize);
    std::vector<ForwardCacheT<float>> caches(bsize);
    std::vector<const PaddedSequenceT<float>*> batch(bsize);
    std::vector<const ForwardCacheT<float>*> cache_ptrs(bsize);
    std::vector<const DropoutMasksT<float>*> mask_ptrs(bsize);
    std::vector<double> targets(bsize);
    for (std::size_t k = 0; k < bsize; ++k) {
      const std::size_t idx = order[start + k];
      masks[k] = make_dropout_masks<float>(cfg, dropout_rng);
      blstm_forward<float>(model, data.seqs[idx], &masks[k], &caches[k]);
      batch[k] = &data.seqs[idx];
      cache_ptrs[k] = &caches[k];
      mask_ptrs[k] = &masks[k];
      targets[k] = data.targets[idx];
    }
    BlstmGradients grads =
        blstm_backward<float>(model, batch, targets, cache_ptrs, mask_ptrs);
    clip_gradients(grads, cfg.clip_value);
    rmsprop_step(model, grads, rms, cfg.learning_rate, cfg.rms_decay,
                 cfg.rms_eps);
  }
}

}  // namespace

double mse_loss(const std::vector<double>& predictions,
                const std::vector<double>& targets) {
  if (predictions.empty()) throw EmptyBatchError("no predictions");
  if (predictions.size() != targets.size())
    throw DimensionMismatchError(std::to_string(predictions.size()) +
                                 " predictions vs " +
                                 std::to_string(targets.size()) + " targets");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    s += d * d;
  }
  return s / static_cast<double>(predictions.size());
}

template <typename T>
BlstmModelT<T> init_blstm_model(const BlstmConfig& cfg, Rng& rng) {
  BlstmModelT<T> model;
  model.config = cfg;
  init_direction(model.forward_params, cfg.hidden, cfg.embed_dim, rng);
  init_direction(model.backward_params, cfg.hidden, cfg.embed_dim, rng);
  const auto H2 = static_cast<Eigen::Index>(2 * cfg.hidden);
  const double db = std::sqrt(6.0 / static_cast<double>(2 * cfg.hidden + 1));
  model.dense_w.resize(H2);
  for (Eigen::Index i = 0; i < H2; ++i)
    model.dense_w[i] = static_cast<T>(rng.uniform(-db, db));
  model.dense_b = 0;
  return model;
}

template BlstmModelT<float> init_blstm_model<float>(const BlstmConfig&, Rng&);
template BlstmModelT<double> init_blstm_model<double>(const BlstmConfig&, Rng&);

BlstmModel train_slstm(const std::vector<LabeledTokens>& train,
                       const WordVectors& wv, BlstmConfig cfg,
                       TrainHistory* history) {
  if (train.empty()) throw EmptyDatasetError("no training instances");
  cfg.variant = BlstmVariant::Slstm;
  cfg.max_len = resolve_max_len(train, cfg);

  PreparedData data = prepare(train, wv, cfg);
  Rng init_rng(derive_seed(cfg.seed, "init"));
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));

  BlstmModel model = init_blstm_model<float>(cfg, init_rng);
  RmsStateT<float> rms;
  zero_state(model, rms);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    run_epoch(model, rms, data, cfg, shuffle_rng, dropout_rng, order);
    if (history)
      history->train_mse.push_back(dataset_mse(model, data.seqs, data.targets));
  }
  if (history) history->stopped_epoch = cfg.epochs;
  return model;
}

BlstmModel train_elstm(const std::vector<LabeledTokens>& train,
                       const std::vector<LabeledTokens>& val,
                       const WordVectors& wv, BlstmConfig cfg,
                       TrainHistory* history) {
  if (train.empty()) throw EmptyDatasetError("no training instances");
  if (val.empty()) throw EmptyDatasetError("early stopping needs a "
                                           "non-empty validation set");
  cfg.variant = BlstmVariant::Elstm;
  cfg.max_len = resolve_max_len(train, cfg);

  PreparedData data = prepare(train, wv, cfg);
  PreparedData vdata = prepare(val, wv, cfg);
  Rng init_rng(derive_seed(cfg.seed, "init"));
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));

  BlstmModel model = init_blstm_model<float>(cfg, init_rng);
  RmsStateT<float> rms;
  zero_state(model, rms);
  BlstmModel best = model;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  EarlyStopper stopper(cfg.patience);
  int ran = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    run_epoch(model, rms, data, cfg, shuffle_rng, dropout_rng, order);
    ran = epoch;
    const double val_mse = dataset_mse(model, vdata.seqs, vdata.targets);
    if (history) {
      history->train_mse.push_back(dataset_mse(model, data.seqs, data.targets));
      history->val_mse.push_back(val_mse);
    }
    const bool stop = stopper.observe(val_mse);
    if (stopper.last_improved()) best = model;
    if (stop) break;
  }
  if (history) {
    history->stopped_epoch = ran;
    history->best_epoch = stopper.best_epoch();
  }
  return best;
}

double gradient_check(
    const BlstmModelT<double>& model,
    const std::vector<std::pair<PaddedSequenceT<double>, double>>& batch,
    double step) {
  std::vector<const PaddedSequenceT<double>*> seqs;
  std::vector<const ForwardCacheT<double>*> cache_ptrs;
  std::vector<const DropoutMasksT<double>*> mask_ptrs;
  std::vector<ForwardCacheT<double>> caches(batch.size());
  std::vector<double> targets;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    blstm_forward<double>(model, batch[k].first, nullptr, &caches[k]);
    seqs.push_back(&batch[k].first);
    cache_ptrs.push_back(&caches[k]);
    mask_ptrs.push_back(nullptr);
    targets.push_back(batch[k].second);
  }
  BlstmGradientsT<double> analytic =
      blstm_backward<double>(model, seqs, targets, cache_ptrs, mask_ptrs);

  // The difference quotient runs in extended precision: near-zero
  // coefficients otherwise drown in cancellation noise at step sizes
  // around 1e-5.
  using ld = long double;
  BlstmModelT<ld> probe;
  probe.config = model.config;
  auto conv_dir = [](const LstmDirectionParamsT<double>& p,
                     LstmDirectionParamsT<ld>& o) {
    o.W = p.W.cast<ld>();
    o.U = p.U.cast<ld>();
    o.b = p.b.cast<ld>();
  };
  conv_dir(model.forward_params, probe.forward_params);
  conv_dir(model.backward_params, probe.backward_params);
  probe.dense_w = model.dense_w.cast<ld>();
  probe.dense_b = static_cast<ld>(model.dense_b);

  std::vector<PaddedSequenceT<ld>> batch_ld(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    batch_ld[k].matrix = batch[k].first.matrix.cast<ld>();
    batch_ld[k].valid_len = batch[k].first.valid_len;
  }

  auto loss = [&]() -> ld {
    ld s = 0;
    for (std::size_t k = 0; k < batch_ld.size(); ++k) {
      const ld d = blstm_forward<ld>(probe, batch_ld[k], nullptr, nullptr) -
                    static_cast<ld>(targets[k]);
      s += d * d;
    }
    return s / static_cast<ld>(batch_ld.size());
  };

  double worst = 0.0;
  auto check_block = [&](ld* param, const double* grad, std::size_t n) {
    const ld h = static_cast<ld>(step);
    for (std::size_t i = 0; i < n; ++i) {
      const ld saved = param[i];
      param[i] = saved + h;
      const ld up = loss();
      param[i] = saved - h;
      const ld down = loss();
      param[i] = saved;
      const double numeric = static_cast<double>((up - down) / (2 * h));
      const double rel = std::abs(grad[i] - numeric) /
                         std::max({std::abs(grad[i]), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  };
  auto check_dir = [&](LstmDirectionParamsT<ld>& p,
                       const LstmDirectionParamsT<double>& g) {
    check_block(p.W.data(), g.W.data(), static_cast<std::size_t>(p.W.size()));
    check_block(p.U.data(), g.U.data(), static_cast<std::size_t>(p.U.size()));
    check_block(p.b.data(), g.b.data(), static_cast<std::size_t>(p.b.size()));
  };
  check_dir(probe.forward_params, analytic.forward_params);
  check_dir(probe.backward_params, analytic.backward_params);
  check_block(probe.dense_w.data(), analytic.dense_w.data(),
              static_cast<std::size_t>(probe.dense_w.size()));
  check_block(&probe.dense_b, &analytic.dense_b, 1);
  return worst;
}

BlstmModelT<double> model_to_double(const BlstmModel& model) {
  BlstmModelT<double> out;
  out.config = model.config;
  auto conv = [](const LstmDirectionParamsT<float>& p,
                 LstmDirectionParamsT<double>& o) {
    o.W = p.W.cast<double>();
    o.U = p.U.cast<double>();
    o.b = p.b.cast<double>();
  };
  conv(model.forward_params, out.forward_params);
  conv(model.backward_params, out.backward_params);
  out.dense_w = model.dense_w.cast<double>();
  out.dense_b = static_cast<double>(model.dense_b);
  return out;
}

namespace {

constexpr char kModelMagic[4] = {'F', 'S', 'B', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
void write_floats(std::ostream& out, const float* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(float)));
}
void read_floats(std::istream& in, float* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(n * sizeof(float)));
}

}  // namespace

// Container layout: magic, version, variant, L, H, embed_dim, then float32
// blocks in column-major Eigen order: forward W,U,b; backward W,U,b;
// dense_w, dense_b. RMSprop state is training-only and excluded.
void save_blstm_model(const std::string& path, const BlstmModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out.write(kModelMagic, 4);
  write_u32(out, kModelVersion);
  write_u32(out, model.config.variant == BlstmVariant::Slstm ? 0 : 1);
  write_u32(out, static_cast<std::uint32_t>(model.config.max_len));
  write_u32(out, static_cast<std::uint32_t>(model.config.hidden));
  write_u32(out, static_cast<std::uint32_t>(model.config.embed_dim));
  auto write_dir = [&](const LstmDirectionParamsT<float>& p) {
    write_floats(out, p.W.data(), static_cast<std::size_t>(p.W.size()));
    write_floats(out, p.U.data(), static_cast<std::size_t>(p.U.size()));
    write_floats(out, p.b.data(), static_cast<std::size_t>(p.b.size()));
  };
  write_dir(model.forward_params);
  write_dir(model.backward_params);
  write_floats(out, model.dense_w.data(),
               static_cast<std::size_t>(model.dense_w.size()));
  write_floats(out, &model.dense_b, 1);
  if (!out) throw FormatError("write failed for '" + path + "'");
}

BlstmModel load_blstm_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw FormatError("not a model file: '" + path + "'");
  if (read_u32(in) != kModelVersion)
    throw FormatError("unsupported model version");
  BlstmModel model;
  model.config.variant =
      read_u32(in) == 0 ? BlstmVariant::Slstm : BlstmVariant::Elstm;
  model.config.max_len = read_u32(in);
  model.config.hidden = read_u32(in);
  model.config.embed_dim = read_u32(in);
  const auto H = static_cast<Eigen::Index>(model.config.hidden);
  const auto E = static_cast<Eigen::Index>(model.config.embed_dim);
  if (H < 1 || E < 1 || model.config.max_len < 1)
    throw FormatError("corrupt model header");
  auto read_dir = [&](LstmDirectionParamsT<float>& p) {
    p.W.resize(4 * H, E);
    p.U.resize(4 * H, H);
    p.b.resize(4 * H);
    read_floats(in, p.W.data(), static_cast<std::size_t>(p.W.size()));
    read_floats(in, p.U.data(), static_cast<std::size_t>(p.U.size()));
    read_floats(in, p.b.data(), static_cast<std::size_t>(p.b.size()));
  };
  read_dir(model.forward_params);
  read_dir(model.backward_params);
  model.dense_w.resize(2 * H);
  read_floats(in, model.dense_w.data(),
              static_cast<std::size_t>(model.dense_w.size()));
  read_floats(in, &model.dense_b, 1);
  if (!in) throw FormatError("truncated model file '" + path + "'");
  return model;
}

}  // namespace finsent
