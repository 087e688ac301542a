#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finsent/blstm.hpp"
#include "finsent/features.hpp"
#include "finsent/svr.hpp"
#include "finsent/tokenize.hpp"

namespace finsent {

enum class ModelKind { Svr, Slstm, Elstm };

// Everything a full experiment run needs; serializable as a TOML-style
// key/value file so every artifact is reproducible from its manifest.
struct ExperimentConfig {
  ModelKind model_kind = ModelKind::Svr;
  std::uint64_t root_seed = 42;
  std::string embedding_path;
  TokenizerMode tokenizer = TokenizerMode::Rules;
  bool lowercase = true;

  NgramOrders ngrams{true, true};
  bool binary_features = true;
  bool replace_company = true;
  bool replace_positive = true;
  bool replace_negative = true;
  std::size_t lexicon_n = 10;
  std::string positive_seed = "excellent";
  std::string negative_seed = "poor";

  SvrConfig svr;
  BlstmConfig blstm;
};

// Throws ConfigError on malformed input, unknown keys or bad values.
ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);

// Applies one "section.key=value" override.
void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

// Canonical serialization; parse_config(config_to_toml(c)) == c.
std::string config_to_toml(const ExperimentConfig& cfg);

// Validates cross-field invariants (seed words present for enabled
// groups, positive sizes, ...). Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

// Shipped presets: "best-svr", "slstm", "elstm".
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

std::string model_kind_name(ModelKind kind);

// FNV-1a 64 over bytes; used for config hashes and dataset checksums.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace finsent
