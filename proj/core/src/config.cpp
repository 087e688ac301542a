#include "finsent/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "finsent/errors.hpp"

namespace finsent {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Strips quotes from strings, flattens arrays to comma-joined form so a
// single string-typed override path serves both files and --set flags.
std::string normalize_value(const std::string& raw, int line_no) {
  std::string v = trim(raw);
  if (v.empty()) throw ConfigError("empty value at line " + std::to_string(line_no));
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("unterminated string at line " + std::to_string(line_no));
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']')
      throw ConfigError("unterminated array at line " + std::to_string(line_no));
    std::string inner = v.substr(1, v.size() - 2);
    std::string out;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      if (item.front() == '"' && item.back() == '"' && item.size() >= 2)
        item = item.substr(1, item.size() - 2);
      if (!out.empty()) out += ',';
      out += item;
    }
    return out;
  }
  return v;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

double parse_num(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& v, const std::string& key) {
  double d = parse_num(v, key);
  long long i = static_cast<long long>(d);
  if (static_cast<double>(i) != d)
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return i;
}

NgramOrders parse_ngrams(const std::string& v, const std::string& key) {
  NgramOrders orders{false, false};
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item == "1") {
      orders.unigrams = true;
    } else if (item == "2") {
      orders.bigrams = true;
    } else {
      throw ConfigError("'" + key + "' accepts orders 1 and 2, got '" + item +
                        "'");
    }
  }
  if (!orders.unigrams && !orders.bigrams)
    throw ConfigError("'" + key + "' must list at least one order");
  return orders;
}

}  // namespace

void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "model") {
    if (value == "svr") {
      cfg.model_kind = ModelKind::Svr;
    } else if (value == "slstm") {
      cfg.model_kind = ModelKind::Slstm;
    } else if (value == "elstm") {
      cfg.model_kind = ModelKind::Elstm;
    } else {
      throw ConfigError("model must be svr, slstm or elstm, got '" + value + "'");
    }
  } else if (key == "seed") {
    cfg.root_seed = static_cast<std::uint64_t>(parse_int(value, key));
  } else if (key == "embedding") {
    cfg.embedding_path = value;
  } else if (key == "tokenizer") {
    if (value == "whitespace") {
      cfg.tokenizer = TokenizerMode::Whitespace;
    } else if (value == "rules") {
      cfg.tokenizer = TokenizerMode::Rules;
    } else {
      throw ConfigError("tokenizer must be whitespace or rules, got '" + value +
                        "'");
    }
  } else if (key == "lowercase") {
    cfg.lowercase = parse_bool(value, key);
  } else if (key == "features.ngrams") {
    cfg.ngrams = parse_ngrams(value, key);
  } else if (key == "features.binary") {
    cfg.binary_features = parse_bool(value, key);
  } else if (key == "features.replace_company") {
    cfg.replace_company = parse_bool(value, key);
  } else if (key == "features.replace_positive") {
    cfg.replace_positive = parse_bool(value, key);
  } else if (key == "features.replace_negative") {
    cfg.replace_negative = parse_bool(value, key);
  } else if (key == "features.lexicon_n") {
    cfg.lexicon_n = static_cast<std::size_t>(parse_int(value, key));
  } else if (key == "features.positive_seed") {
    cfg.positive_seed = value;
  } else if (key == "features.negative_seed") {
    cfg.negative_seed = value;
  } else if (key == "svr.c") {
    cfg.svr.C = parse_num(value, key);
  } else if (key == "svr.epsilon") {
    cfg.svr.epsilon = parse_num(value, key);
  } else if (key == "svr.tol") {
    cfg.svr.tol = parse_num(value, key);
  } else if (key == "svr.max_iter") {
    cfg.svr.max_iter = static_cast<int>(parse_int(value, key));
  } else if (key == "blstm.hidden") {
    cfg.blstm.hidden = static_cast<std::size_t>(parse_int(value, key));
  } else if (key == "blstm.lr") {
    cfg.blstm.learning_rate = parse_num(value, key);
  } else if (key == "blstm.rms_decay") {
    cfg.blstm.rms_decay = parse_num(value, key);
  } else if (key == "blstm.rms_eps") {
    cfg.blstm.rms_eps = parse_num(value, key);
  } else if (key == "blstm.epochs") {
    cfg.blstm.epochs = static_cast<int>(parse_int(value, key));
  } else if (key == "blstm.patience") {
    cfg.blstm.patience = static_cast<int>(parse_int(value, key));
  } else if (key == "blstm.val_fraction") {
    cfg.blstm.val_fraction = parse_num(value, key);
  } else if (key == "blstm.batch_size") {
    cfg.blstm.batch_size = static_cast<std::size_t>(parse_int(value, key));
  } else if (key == "blstm.clip") {
    cfg.blstm.clip_value = parse_num(value, key);
  } else if (key == "blstm.embed_dim") {
    cfg.blstm.embed_dim = static_cast<std::size_t>(parse_int(value, key));
  } else if (key == "blstm.max_len") {
    cfg.blstm.max_len = static_cast<std::size_t>(parse_int(value, key));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& toml_text) {
  ExperimentConfig cfg;
  std::string section;
  std::istringstream in(toml_text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      // keep # inside quoted strings
      bool quoted = false;
      std::size_t cut = std::string::npos;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) {
          cut = i;
          break;
        }
      }
      if (cut != std::string::npos) line.resize(cut);
    }
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("bad section header at line " + std::to_string(line_no));
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(line_no));
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw ConfigError("empty key at line " + std::to_string(line_no));
    if (!section.empty()) key = section + "." + key;
    set_config_key(cfg, key, normalize_value(t.substr(eq + 1), line_no));
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.replace_positive && cfg.positive_seed.empty())
    throw ConfigError("positive replacements enabled but positive_seed is empty");
  if (cfg.replace_negative && cfg.negative_seed.empty())
    throw ConfigError("negative replacements enabled but negative_seed is empty");
  if ((cfg.replace_positive || cfg.replace_negative) && cfg.lexicon_n == 0)
    throw ConfigError("lexicon_n must be >= 1 when lexicon replacements are on");
  if (cfg.svr.C <= 0 || cfg.svr.epsilon < 0 || cfg.svr.tol <= 0 ||
      cfg.svr.max_iter < 1)
    throw ConfigError("svr: need c > 0, epsilon >= 0, tol > 0, max_iter >= 1");
  const auto& b = cfg.blstm;
  if (b.hidden < 1 || b.embed_dim < 1 || b.batch_size < 1 || b.epochs < 1 ||
      b.clip_value <= 0 || b.learning_rate < 0 || b.rms_decay <= 0 ||
      b.rms_decay >= 1)
    throw ConfigError("blstm: bad hidden/embed_dim/batch_size/epochs/clip/lr/"
                      "rms_decay");
  if (cfg.model_kind == ModelKind::Elstm &&
      (b.patience < 1 || b.val_fraction <= 0 || b.val_fraction >= 1))
    throw ConfigError("elstm: need patience >= 1 and 0 < val_fraction < 1");
}

std::string config_to_toml(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto num = [](double d) {
    std::ostringstream s;
    s.precision(17);
    s << d;
    return s.str();
  };
  out << "model = \"" << model_kind_name(cfg.model_kind) << "\"\n";
  out << "seed = " << cfg.root_seed << "\n";
  out << "embedding = \"" << cfg.embedding_path << "\"\n";
  out << "tokenizer = \""
      << (cfg.tokenizer == TokenizerMode::Whitespace ? "whitespace" : "rules")
      << "\"\n";
  out << "lowercase = " << (cfg.lowercase ? "true" : "false") << "\n";
  out << "\n[features]\n";
  out << "ngrams = [";
  if (cfg.ngrams.unigrams) out << "1";
  if (cfg.ngrams.bigrams) out << (cfg.ngrams.unigrams ? ", 2" : "2");
  out << "]\n";
  out << "binary = " << (cfg.binary_features ? "true" : "false") << "\n";
  out << "replace_company = " << (cfg.replace_company ? "true" : "false") << "\n";
  out << "replace_positive = " << (cfg.replace_positive ? "true" : "false")
      << "\n";
  out << "replace_negative = " << (cfg.replace_negative ? "true" : "false")
      << "\n";
  out << "lexicon_n = " << cfg.lexicon_n << "\n";
  out << "positive_seed = \"" << cfg.positive_seed << "\"\n";
  out << "negative_seed = \"" << cfg.negative_seed << "\"\n";
  out << "\n[svr]\n";
  out << "c = " << num(cfg.svr.C) << "\n";
  out << "epsilon = " << num(cfg.svr.epsilon) << "\n";
  out << "tol = " << num(cfg.svr.tol) << "\n";
  out << "max_iter = " << cfg.svr.max_iter << "\n";
  out << "\n[blstm]\n";
  out << "hidden = " << cfg.blstm.hidden << "\n";
  out << "lr = " << num(cfg.blstm.learning_rate) << "\n";
  out << "rms_decay = " << num(cfg.blstm.rms_decay) << "\n";
  out << "rms_eps = " << num(cfg.blstm.rms_eps) << "\n";
  out << "epochs = " << cfg.blstm.epochs << "\n";
  out << "patience = " << cfg.blstm.patience << "\n";
  out << "val_fraction = " << num(cfg.blstm.val_fraction) << "\n";
  out << "batch_size = " << cfg.blstm.batch_size << "\n";
  out << "clip = " << num(cfg.blstm.clip_value) << "\n";
  out << "embed_dim = " << cfg.blstm.embed_dim << "\n";
  out << "max_len = " << cfg.blstm.max_len << "\n";
  return out.str();
}

std::vector<std::string> preset_names() { return {"best-svr", "slstm", "elstm"}; }

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;  // defaults already encode the best SVR setup
  if (name == "best-svr") {
    cfg.model_kind = ModelKind::Svr;
    return cfg;
  }
  if (name == "slstm") {
    cfg.model_kind = ModelKind::Slstm;
    cfg.blstm.variant = BlstmVariant::Slstm;
    cfg.blstm.epochs = 25;
    return cfg;
  }
  if (name == "elstm") {
    cfg.model_kind = ModelKind::Elstm;
    cfg.blstm.variant = BlstmVariant::Elstm;
    cfg.blstm.epochs = 100;  // cap; early stopping usually ends sooner
    cfg.blstm.patience = 10;
    cfg.blstm.val_fraction = 0.1;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Svr: return "svr";
    case ModelKind::Slstm: return "slstm";
    case ModelKind::Elstm: return "elstm";
  }
  return "?";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace finsent
