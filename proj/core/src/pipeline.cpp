#include "finsent/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "finsent/errors.hpp"
#include "finsent/rng.hpp"
#include "json.hpp"

namespace finsent {
namespace {

namespace fs = std::filesystem;

bool needs_embeddings(const ExperimentConfig& cfg) {
  if (cfg.model_kind != ModelKind::Svr) return true;
  return cfg.replace_positive || cfg.replace_negative;
}

std::vector<LabeledTokens> to_labeled_tokens(
    const std::vector<HeadlineInstance>& instances,
    const ExperimentConfig& cfg) {
  std::vector<LabeledTokens> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.gold_score)
      throw DataError("training instance '" + inst.id + "' has no sentiment");
    out.emplace_back(tokenize(inst.sentence, cfg.tokenizer, cfg.lowercase),
                     *inst.gold_score);
  }
  return out;
}

// Group-level validation split for early stopping, seeded from the root.
void split_for_validation(const std::vector<HeadlineInstance>& instances,
                          const ExperimentConfig& cfg,
                          std::vector<HeadlineInstance>& train_out,
                          std::vector<HeadlineInstance>& val_out) {
  auto groups = group_by_sentence(instances);
  if (groups.size() < 2)
    throw DataError("early stopping needs at least 2 sentence groups to "
                    "split off a validation set");
  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(cfg.root_seed, "valsplit"));
  rng.shuffle(order);

  std::size_t n_val = static_cast<std::size_t>(
      static_cast<double>(groups.size()) * cfg.blstm.val_fraction);
  n_val = std::clamp<std::size_t>(n_val, 1, groups.size() - 1);

  std::unordered_set<std::string> val_ids;
  for (std::size_t i = 0; i < n_val; ++i) {
    const auto& g = groups[order[i]];
    val_ids.insert(g.members.begin(), g.members.end());
  }
  for (const auto& inst : instances) {
    (val_ids.count(inst.id) ? val_out : train_out).push_back(inst);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::string replacements_to_json(const ReplacementConfig& rc) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["replace_company"] = rc.replace_company;
  doc["replace_positive"] = rc.replace_positive;
  doc["replace_negative"] = rc.replace_negative;
  doc["company_sequences"] = rc.company_sequences;
  doc["positive"] = {{"seed", rc.positive.seed},
                     {"n", rc.positive.n},
                     {"words", rc.positive.words}};
  doc["negative"] = {{"seed", rc.negative.seed},
                     {"n", rc.negative.n},
                     {"words", rc.negative.words}};
  return doc.dump(2) + "\n";
}

ReplacementConfig replacements_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid replacements JSON: ") + e.what());
  }
  if (doc.value("version", 0) != 1)
    throw FormatError("unsupported replacements version");
  ReplacementConfig rc;
  rc.replace_company = doc.at("replace_company").get<bool>();
  rc.replace_positive = doc.at("replace_positive").get<bool>();
  rc.replace_negative = doc.at("replace_negative").get<bool>();
  rc.company_sequences =
      doc.at("company_sequences").get<std::vector<std::vector<std::string>>>();
  auto read_lex = [&](const char* key, ReplacementLexicon& lex) {
    lex.seed = doc.at(key).at("seed").get<std::string>();
    lex.n = doc.at(key).at("n").get<std::size_t>();
    lex.words = doc.at(key).at("words").get<std::vector<std::string>>();
  };
  read_lex("positive", rc.positive);
  read_lex("negative", rc.negative);
  rc.positive_words.insert(rc.positive.words.begin(), rc.positive.words.end());
  rc.negative_words.insert(rc.negative.words.begin(), rc.negative.words.end());
  return rc;
}

}  // namespace

TokenSequence feature_tokens(const std::string& sentence,
                             const ExperimentConfig& cfg,
                             const ReplacementConfig& replacements) {
  TokenSequence toks = tokenize(sentence, cfg.tokenizer, cfg.lowercase);
  for (auto& t : toks.tokens) t = escape_reserved(t);
  return apply_replacements(toks, replacements);
}

TrainedPipeline train_pipeline(const ExperimentConfig& cfg,
                               const std::vector<HeadlineInstance>& train,
                               const WordVectors* wv) {
  validate_config(cfg);
  if (train.empty()) throw DataError("empty training set");
  if (needs_embeddings(cfg) && !wv)
    throw ConfigError("this configuration requires an embedding model "
                      "(set 'embedding')");

  TrainedPipeline pipeline;
  pipeline.config = cfg;

  if (cfg.model_kind == ModelKind::Svr) {
    ReplacementLexicon positive, negative;
    if (cfg.replace_positive)
      positive = build_replacement_lexicon(*wv, cfg.positive_seed, cfg.lexicon_n);
    if (cfg.replace_negative)
      negative = build_replacement_lexicon(*wv, cfg.negative_seed, cfg.lexicon_n);

    std::vector<std::string> companies;
    companies.reserve(train.size());
    for (const auto& inst : train) companies.push_back(inst.company);
    pipeline.replacements = ReplacementConfig::build(
        companies, cfg.tokenizer, std::move(positive), std::move(negative),
        cfg.replace_company, cfg.replace_positive, cfg.replace_negative);

    std::vector<std::vector<std::string>> gram_lists;
    gram_lists.reserve(train.size());
    for (const auto& inst : train) {
      gram_lists.push_back(extract_ngrams(
          feature_tokens(inst.sentence, cfg, pipeline.replacements),
          cfg.ngrams));
    }
    pipeline.vocab =
        fit_vocabulary(gram_lists, companies, cfg.binary_features);

    std::vector<SparseFeatureVector> X;
    std::vector<double> y;
    X.reserve(train.size());
    y.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      X.push_back(vectorize(gram_lists[i], train[i].company, pipeline.vocab));
      if (!train[i].gold_score)
        throw DataError("training instance '" + train[i].id +
                        "' has no sentiment");
      y.push_back(*train[i].gold_score);
    }
    SvrConfig svr_cfg = cfg.svr;
    svr_cfg.seed = derive_seed(cfg.root_seed, "svr");
    pipeline.svr = train_svr(X, y, svr_cfg);
    return pipeline;
  }

  BlstmConfig bcfg = cfg.blstm;
  bcfg.seed = derive_seed(cfg.root_seed, "blstm");
  if (cfg.model_kind == ModelKind::Slstm) {
    bcfg.variant = BlstmVariant::Slstm;
    pipeline.blstm = train_slstm(to_labeled_tokens(train, cfg), *wv, bcfg);
  } else {
    bcfg.variant = BlstmVariant::Elstm;
    std::vector<HeadlineInstance> tr, va;
    split_for_validation(train, cfg, tr, va);
    pipeline.blstm = train_elstm(to_labeled_tokens(tr, cfg),
                                 to_labeled_tokens(va, cfg), *wv, bcfg);
  }
  return pipeline;
}

PredictionSet predict_pipeline(const TrainedPipeline& pipeline,
                               const std::vector<HeadlineInstance>& instances,
                               const WordVectors* wv, bool clamp) {
  const ExperimentConfig& cfg = pipeline.config;
  PredictionSet preds;
  if (cfg.model_kind == ModelKind::Svr) {
    for (const auto& inst : instances) {
      auto grams = extract_ngrams(
          feature_tokens(inst.sentence, cfg, pipeline.replacements),
          cfg.ngrams);
      double score = predict_svr(
          pipeline.svr, vectorize(grams, inst.company, pipeline.vocab));
      if (clamp) score = std::clamp(score, -1.0, 1.0);
      preds.scores.emplace(inst.id, score);
    }
    return preds;
  }

  if (!wv)
    throw ConfigError("BLSTM prediction requires the embedding model");
  const BlstmConfig& bcfg = pipeline.blstm.config;
  for (const auto& inst : instances) {
    auto seq = embed_sequence<float>(
        tokenize(inst.sentence, cfg.tokenizer, cfg.lowercase), *wv,
        bcfg.max_len, bcfg.embed_dim);
    double score =
        static_cast<double>(blstm_forward<float>(pipeline.blstm, seq, nullptr));
    if (clamp) score = std::clamp(score, -1.0, 1.0);
    preds.scores.emplace(inst.id, score);
  }
  return preds;
}

void save_pipeline(const std::string& dir, const TrainedPipeline& pipeline,
                   const std::string& dataset_path,
                   const std::string& dataset_bytes) {
  fs::create_directories(dir);
  const std::string config_toml = config_to_toml(pipeline.config);

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["model"] = model_kind_name(pipeline.config.model_kind);
  manifest["seed"] = pipeline.config.root_seed;
  manifest["config"] = config_toml;
  manifest["config_hash"] = fnv1a64_hex(config_toml);
  manifest["dataset"] = {{"path", dataset_path},
                         {"checksum", fnv1a64_hex(dataset_bytes)}};
  write_file((fs::path(dir) / "manifest.json").string(),
             manifest.dump(2) + "\n");

  if (pipeline.config.model_kind == ModelKind::Svr) {
    write_file((fs::path(dir) / "model.json").string(),
               svr_model_to_json(pipeline.svr));
    write_file((fs::path(dir) / "vocab.json").string(),
               vocabulary_to_json(pipeline.vocab));
    write_file((fs::path(dir) / "replacements.json").string(),
               replacements_to_json(pipeline.replacements));
  } else {
    save_blstm_model((fs::path(dir) / "model.bin").string(), pipeline.blstm);
  }
}

TrainedPipeline load_pipeline(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid manifest: ") + e.what());
  }
  if (manifest.value("version", 0) != 1)
    throw FormatError("unsupported manifest version");

  TrainedPipeline pipeline;
  pipeline.config = parse_config(manifest.at("config").get<std::string>());
  const std::string kind = manifest.at("model").get<std::string>();
  if (kind != model_kind_name(pipeline.config.model_kind))
    throw VocabularyMismatchError("manifest model kind '" + kind +
                                  "' does not match its config");

  if (pipeline.config.model_kind == ModelKind::Svr) {
    pipeline.svr =
        svr_model_from_json(read_file((fs::path(dir) / "model.json").string()));
    pipeline.vocab = vocabulary_from_json(
        read_file((fs::path(dir) / "vocab.json").string()));
    pipeline.replacements = replacements_from_json(
        read_file((fs::path(dir) / "replacements.json").string()));
    if (pipeline.svr.weights.size() != pipeline.vocab.width())
      throw VocabularyMismatchError(
          "model width " + std::to_string(pipeline.svr.weights.size()) +
          " does not match vocabulary width " +
          std::to_string(pipeline.vocab.width()));
  } else {
    pipeline.blstm =
        load_blstm_model((fs::path(dir) / "model.bin").string());
    pipeline.blstm.config.seed = derive_seed(pipeline.config.root_seed, "blstm");
  }
  return pipeline;
}

CvReport run_cross_validation(const ExperimentConfig& cfg,
                              const std::vector<HeadlineInstance>& instances,
                              int k, Metric metric, const WordVectors* wv) {
  auto groups = group_by_sentence(instances);
  FoldAssignment folds =
      kfold_split(groups, k, derive_seed(cfg.root_seed, "folds"));
  return cross_validate(
      instances, folds, metric,
      [&](const std::vector<HeadlineInstance>& train,
          const std::vector<HeadlineInstance>& test) {
        TrainedPipeline pipeline = train_pipeline(cfg, train, wv);
        return predict_pipeline(pipeline, test, wv);
      });
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base,
                                          const std::vector<GridAxis>& axes) {
  std::vector<ExperimentConfig> configs{base};
  for (const auto& axis : axes) {
    if (axis.values.empty())
      throw ConfigError("grid axis '" + axis.key + "' has no values");
    std::vector<ExperimentConfig> expanded;
    expanded.reserve(configs.size() * axis.values.size());
    for (const auto& cfg : configs) {
      for (const auto& value : axis.values) {
        ExperimentConfig next = cfg;
        if (axis.key == "replacements") {
          // shorthand axis toggling all three groups at once
          bool on = value == "true" || value == "on";
          next.replace_company = on;
          next.replace_positive = on;
          next.replace_negative = on;
        } else {
          set_config_key(next, axis.key, value);
        }
        expanded.push_back(std::move(next));
      }
    }
    configs = std::move(expanded);
  }
  // Collapse duplicates the axes may create (e.g. lexicon_n values while
  // replacements are off).
  std::vector<ExperimentConfig> unique;
  std::unordered_set<std::string> seen;
  for (auto& cfg : configs) {
    if (!cfg.replace_positive && !cfg.replace_negative)
      cfg.lexicon_n = base.lexicon_n;  // inert axis, normalize before dedup
    if (seen.insert(config_to_toml(cfg)).second) unique.push_back(std::move(cfg));
  }
  return unique;
}

std::vector<GridAxis> default_grid() {
  return {
      {"svr.c", {"0.01", "0.1", "1"}},
      {"svr.epsilon", {"0.001", "0.01", "0.1"}},
      {"tokenizer", {"whitespace", "rules"}},
      {"features.ngrams", {"1", "2", "1,2"}},
      {"replacements", {"false", "true"}},
      {"features.lexicon_n", {"5", "10", "20"}},
  };
}

}  // namespace finsent
