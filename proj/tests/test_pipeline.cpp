#include "finsent/pipeline.hpp"

#include <filesystem>

#include "doctest.h"
#include "finsent/embeddings.hpp"
#include "finsent/errors.hpp"
#include "testutil.hpp"

using namespace finsent;

namespace {

// Synthetic embedding space: sentiment-bearing words cluster around the
// lexicon seeds so replacement induction has real structure.
WordVectors synthetic_embeddings(std::uint64_t seed = 1) {
  Rng rng(seed);
  WordVectors wv;
  wv.dim = 8;
  auto add = [&](const std::string& word, const std::vector<float>& base,
                 double jitter) {
    wv.index.emplace(word, wv.vocab.size());
    wv.vocab.push_back(word);
    for (std::size_t d = 0; d < wv.dim; ++d) {
      float b = d < base.size() ? base[d] : 0.0f;
      wv.matrix.push_back(b + static_cast<float>(rng.uniform(-jitter, jitter)));
    }
  };
  const std::vector<float> pos{1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<float> neg{-1, -1, 0, 0, 0, 0, 0, 0};
  const std::vector<float> neutral{0, 0, 1, 0, 0, 0, 0, 0};
  add("excellent", pos, 0.01);
  for (const char* w : {"rises", "soars", "gains", "beats", "rallies",
                        "strong", "solid", "record", "upbeat", "buoyant",
                        "improves", "outperforms"})
    add(w, pos, 0.2);
  add("poor", neg, 0.01);
  for (const char* w : {"falls", "plunges", "slides", "warns", "misses",
                        "weak", "slump", "losses", "downbeat", "cuts",
                        "tumbles", "underperforms"})
    add(w, neg, 0.2);
  for (const char* w : {"glencore", "barclays", "hsbc", "tesco", "bp",
                        "shares", "profit", "quarter", "the", "in", "and",
                        "results", "bank", "deutsche", "says", "unit"})
    add(w, neutral, 0.4);
  return wv;
}

std::vector<HeadlineInstance> synthetic_dataset() {
  // positive cue -> positive score toward the company, negative likewise
  std::vector<HeadlineInstance> data;
  const char* pos_words[] = {"rises", "soars", "gains", "beats", "rallies"};
  const char* neg_words[] = {"falls", "plunges", "slides", "warns", "misses"};
  const char* companies[] = {"Glencore", "Barclays", "HSBC", "Tesco", "BP"};
  int id = 0;
  Rng rng(9);
  for (int i = 0; i < 30; ++i) {
    const char* company = companies[i % 5];
    bool positive = i % 2 == 0;
    const char* cue = positive ? pos_words[i % 5] : neg_words[i % 5];
    double score = (positive ? 1 : -1) * (0.4 + 0.4 * rng.uniform());
    data.push_back({"h" + std::to_string(id++), company,
                    std::string(company) + " shares " + cue + " in quarter " +
                        std::to_string(i),
                    score});
  }
  return data;
}

}  // namespace

TEST_CASE("svr pipeline: train, save, load, predict identically") {
  testutil::TempDir tmp;
  WordVectors wv = synthetic_embeddings();
  auto data = synthetic_dataset();

  ExperimentConfig cfg = preset_config("best-svr");
  cfg.root_seed = 11;
  cfg.lexicon_n = 5;

  TrainedPipeline trained = train_pipeline(cfg, data, &wv);
  PredictionSet before = predict_pipeline(trained, data, &wv);

  save_pipeline(tmp.file("model"), trained, "train.json", "bytes");
  TrainedPipeline loaded = load_pipeline(tmp.file("model"));
  PredictionSet after = predict_pipeline(loaded, data, &wv);

  REQUIRE(before.scores.size() == data.size());
  for (const auto& [id, score] : before.scores) {
    REQUIRE(after.scores.count(id));
    CHECK(after.scores.at(id) == score);
  }

  // training fit should be decent on this separable synthetic set
  double err = mae(before, data);
  CHECK(err < 0.2);
}

TEST_CASE("clamped predictions stay inside [-1, 1]") {
  WordVectors wv = synthetic_embeddings();
  auto data = synthetic_dataset();
  ExperimentConfig cfg = preset_config("best-svr");
  cfg.lexicon_n = 5;
  cfg.svr.C = 100.0;  // strong fit can overshoot the label range
  cfg.svr.epsilon = 0.0;
  TrainedPipeline trained = train_pipeline(cfg, data, &wv);

  PredictionSet raw = predict_pipeline(trained, data, &wv, /*clamp=*/false);
  PredictionSet clamped = predict_pipeline(trained, data, &wv, /*clamp=*/true);
  for (const auto& [id, score] : clamped.scores) {
    CHECK(score >= -1.0);
    CHECK(score <= 1.0);
    CHECK(score == std::clamp(raw.scores.at(id), -1.0, 1.0));
  }
}

TEST_CASE("svr pipeline without lexicons needs no embeddings") {
  auto data = synthetic_dataset();
  ExperimentConfig cfg = preset_config("best-svr");
  cfg.replace_positive = false;
  cfg.replace_negative = false;
  TrainedPipeline trained = train_pipeline(cfg, data, nullptr);
  CHECK(predict_pipeline(trained, data, nullptr).scores.size() == data.size());

  // but lexicon replacements without embeddings is a config error
  ExperimentConfig full = preset_config("best-svr");
  CHECK_THROWS_AS(train_pipeline(full, data, nullptr), ConfigError);
}

TEST_CASE("reserved-token collisions in raw text are escaped") {
  auto data = synthetic_dataset();
  ExperimentConfig cfg = preset_config("best-svr");
  cfg.replace_positive = false;
  cfg.replace_negative = false;
  cfg.tokenizer = TokenizerMode::Whitespace;
  cfg.lowercase = false;  // the one path where the collision can survive
  TrainedPipeline trained = train_pipeline(cfg, data, nullptr);

  TokenSequence toks = feature_tokens(
      "Glencore " + kCompanyToken + " rises", cfg, trained.replacements);
  int reserved = 0;
  for (const auto& t : toks.tokens) reserved += is_reserved_token(t) ? 1 : 0;
  CHECK(reserved == 1);  // only the Glencore replacement, not the raw token
}

TEST_CASE("blstm pipeline: slstm end-to-end with manifest round-trip") {
  testutil::TempDir tmp;
  WordVectors wv = synthetic_embeddings();
  auto data = synthetic_dataset();

  ExperimentConfig cfg = preset_config("slstm");
  cfg.root_seed = 21;
  cfg.blstm.hidden = 8;
  cfg.blstm.embed_dim = 8;
  cfg.blstm.epochs = 5;
  cfg.blstm.batch_size = 8;

  TrainedPipeline trained = train_pipeline(cfg, data, &wv);
  CHECK(trained.blstm.config.max_len >= 6);

  PredictionSet before = predict_pipeline(trained, data, &wv);
  save_pipeline(tmp.file("m"), trained, "train.json", "bytes");
  TrainedPipeline loaded = load_pipeline(tmp.file("m"));
  PredictionSet after = predict_pipeline(loaded, data, &wv);
  for (const auto& [id, score] : before.scores)
    CHECK(after.scores.at(id) == score);

  CHECK_THROWS_AS(predict_pipeline(loaded, data, nullptr), ConfigError);
}

TEST_CASE("elstm pipeline rejects a single-sentence-group corpus") {
  WordVectors wv = synthetic_embeddings();
  std::vector<HeadlineInstance> one = {
      {"a", "Glencore", "glencore rises", 0.5},
      {"b", "Barclays", "glencore rises", 0.4}};  // same sentence group
  ExperimentConfig cfg = preset_config("elstm");
  cfg.blstm.embed_dim = 8;
  CHECK_THROWS_AS(train_pipeline(cfg, one, &wv), DataError);
}

TEST_CASE("elstm pipeline trains with an internal validation split") {
  WordVectors wv = synthetic_embeddings();
  auto data = synthetic_dataset();

  ExperimentConfig cfg = preset_config("elstm");
  cfg.root_seed = 31;
  cfg.blstm.hidden = 6;
  cfg.blstm.embed_dim = 8;
  cfg.blstm.epochs = 6;
  cfg.blstm.patience = 3;
  cfg.blstm.batch_size = 8;

  TrainedPipeline trained = train_pipeline(cfg, data, &wv);
  CHECK(predict_pipeline(trained, data, &wv).scores.size() == data.size());
}

TEST_CASE("pipeline determinism: same seed, same artifacts") {
  testutil::TempDir tmp;
  WordVectors wv = synthetic_embeddings();
  auto data = synthetic_dataset();

  ExperimentConfig cfg = preset_config("best-svr");
  cfg.root_seed = 41;
  cfg.lexicon_n = 5;

  save_pipeline(tmp.file("one"), train_pipeline(cfg, data, &wv), "d.json", "x");
  save_pipeline(tmp.file("two"), train_pipeline(cfg, data, &wv), "d.json", "x");
  for (const char* name : {"manifest.json", "model.json", "vocab.json",
                           "replacements.json"}) {
    CAPTURE(name);
    CHECK(testutil::read_file(tmp.file("one") + "/" + name) ==
          testutil::read_file(tmp.file("two") + "/" + name));
  }
}

TEST_CASE("cross validation harness over the real pipeline") {
  WordVectors wv = synthetic_embeddings();
  auto data = synthetic_dataset();

  ExperimentConfig cfg = preset_config("best-svr");
  cfg.root_seed = 51;
  cfg.lexicon_n = 5;
  cfg.svr.max_iter = 2000;

  CvReport report = run_cross_validation(cfg, data, 3, Metric::Metric1, &wv);
  REQUIRE(report.fold_scores.size() == 3);
  CvReport again = run_cross_validation(cfg, data, 3, Metric::Metric1, &wv);
  CHECK(report.fold_scores == again.fold_scores);
  // the synthetic set is separable, so CV cosine should be clearly positive
  CHECK(report.mean > 0.3);
}
