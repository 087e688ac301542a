// finsent: aspect-level financial sentiment pipeline CLI.
//
// Subcommands: train, predict, evaluate, cv, tokenize, neighbors.
// Exit codes: 0 success, 2 config error, 3 data error, 4 training error,
// 5 evaluation error, 1 anything unexpected.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "finsent/config.hpp"
#include "finsent/corpus.hpp"
#include "finsent/embeddings.hpp"
#include "finsent/errors.hpp"
#include "finsent/eval.hpp"
#include "finsent/pipeline.hpp"
#include "finsent/tokenize.hpp"
#include "json.hpp"

namespace {

using namespace finsent;
namespace fs = std::filesystem;

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
}

DatasetFormat format_for(const std::string& path, const std::string& flag) {
  if (flag == "json") return DatasetFormat::Json;
  if (flag == "csv") return DatasetFormat::Csv;
  if (!flag.empty()) throw ConfigError("unknown format '" + flag + "'");
  return fs::path(path).extension() == ".csv" ? DatasetFormat::Csv
                                              : DatasetFormat::Json;
}

struct ConfigArgs {
  std::string preset;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string embedding_flag;
  // direct flags; applied after --set
  std::vector<std::pair<std::string, std::string>> flag_overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--preset", args.preset,
                  "shipped preset: best-svr, slstm or elstm");
  cmd->add_option("--config", args.config_path, "TOML config file");
  cmd->add_option("--set", args.overrides,
                  "override a config key, e.g. --set svr.c=1")
      ->type_name("KEY=VALUE");
  cmd->add_option("--embedding", args.embedding_flag,
                  "embedding model path (overrides the config)");

  auto flag = [cmd, &args](const char* name, const char* key,
                           const char* help) {
    cmd->add_option_function<std::string>(
        name,
        [&args, key](const std::string& v) {
          args.flag_overrides.emplace_back(key, v);
        },
        help);
  };
  flag("--variant", "model", "model kind: svr, slstm or elstm");
  flag("--hidden", "blstm.hidden", "BLSTM per-direction hidden size");
  flag("--epochs", "blstm.epochs", "BLSTM epoch count or cap");
  flag("--patience", "blstm.patience", "early-stopping patience");
  flag("--val-fraction", "blstm.val_fraction", "validation split fraction");
  flag("--seed", "seed", "root seed");
  flag("--lr", "blstm.lr", "RMSprop learning rate");
}

ExperimentConfig resolve_config(const ConfigArgs& args) {
  if (!args.preset.empty() && !args.config_path.empty())
    throw ConfigError("--preset and --config are mutually exclusive");
  ExperimentConfig cfg = !args.config_path.empty()
                             ? load_config(args.config_path)
                             : preset_config(args.preset.empty() ? "best-svr"
                                                                 : args.preset);
  if (const char* env = std::getenv("FINSENT_SEED")) {
    set_config_key(cfg, "seed", env);
  }
  for (const auto& kv : args.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    set_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [key, value] : args.flag_overrides)
    set_config_key(cfg, key, value);
  if (!args.embedding_flag.empty()) cfg.embedding_path = args.embedding_flag;
  validate_config(cfg);
  return cfg;
}

bool config_needs_embeddings(const ExperimentConfig& cfg) {
  return cfg.model_kind != ModelKind::Svr || cfg.replace_positive ||
         cfg.replace_negative;
}

WordVectors load_embedding_auto(const std::string& path) {
  const auto ext = fs::path(path).extension();
  if (ext == ".txt" || ext == ".text") return load_word2vec_text(path);
  return load_word2vec_binary(path);
}

std::vector<GridAxis> parse_grid_file(const std::string& path) {
  std::vector<GridAxis> axes;
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = line;
    t.erase(0, t.find_first_not_of(" \t\r"));
    t.erase(t.find_last_not_of(" \t\r") + 1);
    if (t.empty() || t.front() == '[') continue;  // section headers ignored
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("grid line " + std::to_string(line_no) +
                        ": expected key = [values]");
    GridAxis axis;
    axis.key = t.substr(0, eq);
    axis.key.erase(axis.key.find_last_not_of(" \t") + 1);
    std::string v = t.substr(eq + 1);
    v.erase(0, v.find_first_not_of(" \t"));
    if (v.empty() || v.front() != '[' || v.back() != ']')
      throw ConfigError("grid values must be a [list] at line " +
                        std::to_string(line_no));
    std::stringstream items(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(items, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t\""));
      item.erase(item.find_last_not_of(" \t\"") + 1);
      if (!item.empty()) axis.values.push_back(item);
    }
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw ConfigError("grid file has no axes");
  return axes;
}

int cmd_train(const ConfigArgs& cargs, const std::string& data_path,
              const std::string& format_flag, bool lenient,
              const std::string& out_dir) {
  ExperimentConfig cfg = resolve_config(cargs);
  auto instances = load_dataset(data_path, format_for(data_path, format_flag),
                                !lenient);
  WordVectors wv;
  const WordVectors* wvp = nullptr;
  if (config_needs_embeddings(cfg)) {
    if (cfg.embedding_path.empty())
      throw ConfigError("this configuration requires --embedding or the "
                        "'embedding' config key");
    wv = load_embedding_auto(cfg.embedding_path);
    wvp = &wv;
  }
  TrainedPipeline pipeline;
  try {
    pipeline = train_pipeline(cfg, instances, wvp);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw TrainingError(e.what());
  }
  save_pipeline(out_dir, pipeline, data_path, read_file(data_path));
  std::cout << "trained " << model_kind_name(cfg.model_kind) << " on "
            << instances.size() << " instances -> " << out_dir << "\n";
  return 0;
}

int cmd_predict(const std::string& model_dir, const std::string& data_path,
                const std::string& format_flag, bool lenient,
                const std::string& out_path, bool clamp,
                const std::string& embedding_flag) {
  TrainedPipeline pipeline = load_pipeline(model_dir);
  auto instances = load_dataset(data_path, format_for(data_path, format_flag),
                                !lenient);
  WordVectors wv;
  const WordVectors* wvp = nullptr;
  if (pipeline.config.model_kind != ModelKind::Svr) {
    std::string path = !embedding_flag.empty() ? embedding_flag
                                               : pipeline.config.embedding_path;
    if (path.empty())
      throw ConfigError("BLSTM prediction requires --embedding");
    wv = load_embedding_auto(path);
    wvp = &wv;
  }
  PredictionSet preds = predict_pipeline(pipeline, instances, wvp, clamp);
  std::vector<std::string> id_order;
  id_order.reserve(instances.size());
  for (const auto& inst : instances) id_order.push_back(inst.id);
  write_file(out_path, predictions_to_json(preds, id_order));
  std::cout << "wrote " << preds.scores.size() << " predictions -> "
            << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gold_path,
                 const std::string& format_flag, bool lenient,
                 std::size_t top_k, bool allow_partial,
                 const std::string& out_path) {
  PredictionSet preds = predictions_from_json(read_file(pred_path));
  auto gold = load_dataset(gold_path, format_for(gold_path, format_flag),
                           !lenient);
  std::unordered_set<std::string> gold_ids;
  for (const auto& inst : gold) gold_ids.insert(inst.id);
  for (const auto& [id, score] : preds.scores) {
    if (!gold_ids.count(id))
      throw DataError("prediction id '" + id + "' is not in the gold set");
  }
  EvalReport report = evaluate(preds, gold, top_k, allow_partial);
  const std::string text = report_to_json(report);
  if (!out_path.empty()) write_file(out_path, text);
  std::cout << text;
  return 0;
}

int cmd_cv(const ConfigArgs& cargs, const std::string& data_path,
           const std::string& format_flag, bool lenient, int k,
           const std::string& metric_name, const std::string& grid_path,
           bool full_grid, const std::string& out_path) {
  ExperimentConfig base = resolve_config(cargs);
  Metric metric = metric_from_name(metric_name);
  auto instances = load_dataset(data_path, format_for(data_path, format_flag),
                                !lenient);

  std::vector<GridAxis> axes;
  if (!grid_path.empty()) {
    axes = parse_grid_file(grid_path);
  } else if (full_grid) {
    axes = default_grid();
  }
  std::vector<ExperimentConfig> configs = expand_grid(base, axes);

  WordVectors wv;
  const WordVectors* wvp = nullptr;
  bool any_embeddings = false;
  for (const auto& cfg : configs)
    any_embeddings = any_embeddings || config_needs_embeddings(cfg);
  if (any_embeddings) {
    if (base.embedding_path.empty())
      throw ConfigError("grid includes embedding-dependent configurations; "
                        "set --embedding");
    wv = load_embedding_auto(base.embedding_path);
    wvp = &wv;
  }

  struct Row {
    std::string label;
    CvReport report;
  };
  std::vector<Row> rows;
  for (const auto& cfg : configs) {
    std::ostringstream label;
    label << "model=" << model_kind_name(cfg.model_kind)
          << " tok=" << (cfg.tokenizer == TokenizerMode::Rules ? "rules" : "ws");
    if (cfg.model_kind == ModelKind::Svr) {
      const bool repl = cfg.replace_company || cfg.replace_positive ||
                        cfg.replace_negative;
      label << " ngrams=" << (cfg.ngrams.unigrams ? "1" : "")
            << (cfg.ngrams.unigrams && cfg.ngrams.bigrams ? "+" : "")
            << (cfg.ngrams.bigrams ? "2" : "") << " C=" << cfg.svr.C
            << " eps=" << cfg.svr.epsilon << " repl=" << (repl ? "on" : "off");
      if (cfg.replace_positive || cfg.replace_negative)
        label << " N=" << cfg.lexicon_n;
    } else {
      label << " H=" << cfg.blstm.hidden << " lr=" << cfg.blstm.learning_rate
            << " epochs=" << cfg.blstm.epochs;
      if (cfg.model_kind == ModelKind::Elstm)
        label << " patience=" << cfg.blstm.patience;
    }
    rows.push_back({label.str(),
                    run_cross_validation(cfg, instances, k, metric, wvp)});
  }
  const bool lower_better = metric == Metric::Mae;
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    return lower_better ? a.report.mean < b.report.mean
                        : a.report.mean > b.report.mean;
  });

  nlohmann::json doc = nlohmann::json::array();
  std::cout << "rank  " << metric_name << "     config\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ostringstream mean;
    mean.precision(6);
    mean << std::fixed << rows[i].report.mean;
    std::cout << i + 1 << "     " << mean.str() << "  " << rows[i].label
              << "\n";
    doc.push_back({{"rank", i + 1},
                   {"mean", rows[i].report.mean},
                   {"folds", rows[i].report.fold_scores},
                   {"config", rows[i].label}});
  }
  if (!out_path.empty()) write_file(out_path, doc.dump(2) + "\n");
  return 0;
}

int cmd_tokenize(const std::string& mode, bool no_lowercase) {
  TokenizerMode m;
  if (mode == "whitespace") {
    m = TokenizerMode::Whitespace;
  } else if (mode == "rules") {
    m = TokenizerMode::Rules;
  } else {
    throw ConfigError("--mode must be whitespace or rules");
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    TokenSequence seq = tokenize(line, m, !no_lowercase);
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      if (i) std::cout << ' ';
      std::cout << seq.tokens[i];
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_neighbors(const std::string& model_path, const std::string& word,
                  std::size_t n) {
  WordVectors wv = load_embedding_auto(model_path);
  for (const auto& [neighbor, sim] : most_similar(wv, word, n)) {
    std::ostringstream s;
    s.precision(6);
    s << std::fixed << sim;
    std::cout << neighbor << '\t' << s.str() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aspect-level financial sentiment: SVR and BLSTM regressors"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a model from a config");
  ConfigArgs train_cfg;
  std::string train_data, train_format, train_out;
  bool train_lenient = false;
  add_config_options(train, train_cfg);
  train->add_option("--data", train_data, "training dataset")->required();
  train->add_option("--format", train_format, "json or csv");
  train->add_flag("--lenient", train_lenient, "ignore unknown dataset keys");
  train->add_option("--out", train_out, "output model directory")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "score instances");
  std::string pr_model, pr_data, pr_format, pr_out, pr_embedding;
  bool pr_clamp = false, pr_lenient = false;
  predict->add_option("--model", pr_model, "model directory")->required();
  predict->add_option("--data", pr_data, "input dataset")->required();
  predict->add_option("--format", pr_format, "json or csv");
  predict->add_flag("--lenient", pr_lenient, "ignore unknown dataset keys");
  predict->add_option("--out", pr_out, "predictions JSON path")->required();
  predict->add_flag("--clamp", pr_clamp, "clamp scores to [-1, 1]");
  predict->add_option("--embedding", pr_embedding,
                      "embedding model (BLSTM; overrides manifest)");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions");
  std::string ev_pred, ev_gold, ev_format, ev_out;
  std::size_t ev_topk = 50;
  bool ev_partial = false, ev_lenient = false;
  eval_cmd->add_option("--pred", ev_pred, "predictions JSON")->required();
  eval_cmd->add_option("--gold", ev_gold, "gold dataset")->required();
  eval_cmd->add_option("--format", ev_format, "json or csv");
  eval_cmd->add_flag("--lenient", ev_lenient, "ignore unknown dataset keys");
  eval_cmd->add_option("--top-k", ev_topk, "top error count (default 50)");
  eval_cmd->add_flag("--allow-partial", ev_partial,
                     "score metric 2 over answered members only");
  eval_cmd->add_option("--out", ev_out, "also write the report here");

  // cv
  auto* cv = app.add_subcommand("cv", "cross-validated grid search");
  ConfigArgs cv_cfg;
  std::string cv_data, cv_format, cv_metric = "metric1", cv_grid, cv_out;
  int cv_k = 5;
  bool cv_full = false, cv_lenient = false;
  add_config_options(cv, cv_cfg);
  cv->add_option("--data", cv_data, "labeled dataset")->required();
  cv->add_option("--format", cv_format, "json or csv");
  cv->add_flag("--lenient", cv_lenient, "ignore unknown dataset keys");
  cv->add_option("--k", cv_k, "fold count (default 5)");
  cv->add_option("--metric", cv_metric,
                 "selection metric: metric1|metric2|metric3|mae");
  cv->add_option("--grid", cv_grid, "grid file: key = [v1, v2, ...] lines");
  cv->add_flag("--full-grid", cv_full, "use the shipped default grid");
  cv->add_option("--out", cv_out, "write the ranked table as JSON");

  // tokenize
  auto* tok = app.add_subcommand("tokenize", "tokenize stdin lines");
  std::string tok_mode;
  bool tok_nolower = false;
  tok->add_option("--mode", tok_mode, "whitespace or rules")->required();
  tok->add_flag("--no-lowercase", tok_nolower, "keep original casing");

  // neighbors
  auto* nb = app.add_subcommand("neighbors", "nearest embedding neighbors");
  std::string nb_model, nb_word;
  std::size_t nb_n = 10;
  nb->add_option("--model", nb_model, "word2vec model path")->required();
  nb->add_option("--word", nb_word, "query word")->required();
  nb->add_option("--n", nb_n, "neighbor count (default 10)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(train_cfg, train_data, train_format, train_lenient,
                       train_out);
    if (predict->parsed())
      return cmd_predict(pr_model, pr_data, pr_format, pr_lenient, pr_out,
                         pr_clamp, pr_embedding);
    if (eval_cmd->parsed())
      return cmd_evaluate(ev_pred, ev_gold, ev_format, ev_lenient, ev_topk,
                          ev_partial, ev_out);
    if (cv->parsed())
      return cmd_cv(cv_cfg, cv_data, cv_format, cv_lenient, cv_k, cv_metric,
                    cv_grid, cv_full, cv_out);
    if (tok->parsed()) return cmd_tokenize(tok_mode, tok_nolower);
    if (nb->parsed()) return cmd_neighbors(nb_model, nb_word, nb_n);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
