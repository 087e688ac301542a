#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "finsent/embeddings.hpp"
#include "finsent/tokenize.hpp"

namespace finsent {

// Reserved class tokens. Raw tokenized text can never contain them: the
// pipeline escapes exact collisions with escape_reserved() before
// replacement runs, and ReplacementConfig::build sanitizes its own inputs.
inline const std::string kCompanyToken = "⟨COMPANY⟩";
inline const std::string kPositiveToken = "⟨POS⟩";
inline const std::string kNegativeToken = "⟨NEG⟩";

bool is_reserved_token(const std::string& token);
// Maps a reserved token to an inert escaped form; other tokens unchanged.
std::string escape_reserved(const std::string& token);

// Word-replacement configuration of the feature pipeline: known company
// names (token sequences, matched case-insensitively and longest-first)
// plus the two embedding-induced lexicons.
struct ReplacementConfig {
  std::vector<std::vector<std::string>> company_sequences;  // lowercased
  ReplacementLexicon positive;
  ReplacementLexicon negative;
  std::unordered_set<std::string> positive_words;
  std::unordered_set<std::string> negative_words;
  bool replace_company = false;
  bool replace_positive = false;
  bool replace_negative = false;

  // Tokenizes company names with the given mode, dedupes, sorts longest
  // first, fills the lexicon lookup sets and sanitizes reserved collisions.
  static ReplacementConfig build(const std::vector<std::string>& company_names,
                                 TokenizerMode mode,
                                 ReplacementLexicon positive,
                                 ReplacementLexicon negative,
                                 bool replace_company, bool replace_positive,
                                 bool replace_negative);
};

// Precedence: company (multi-token, greedy longest-first) then positive
// then negative; a consumed token is not re-examined. Idempotent.
TokenSequence apply_replacements(const TokenSequence& tokens,
                                 const ReplacementConfig& cfg);

struct NgramOrders {
  bool unigrams = true;
  bool bigrams = true;
};

// Bigrams are joined with 0x1F (U+241F in documentation), which the
// tokenizers treat as whitespace, so it cannot occur inside a token.
inline constexpr char kBigramSeparator = '\x1F';

// All unigrams left-to-right, then all bigrams left-to-right.
std::vector<std::string> extract_ngrams(const TokenSequence& tokens,
                                        NgramOrders orders);

// Normalized aspect key for the boolean company block (lowercase + trim).
std::string aspect_key(const std::string& company);

// Fitted on training data only; frozen afterward. Columns are dense,
// n-gram columns first (first-occurrence order), then aspect columns.
struct Vocabulary {
  std::vector<std::string> grams;
  std::unordered_map<std::string, std::uint32_t> gram_index;
  std::vector<std::string> aspects;
  std::unordered_map<std::string, std::uint32_t> aspect_index;
  bool binary = true;

  std::uint32_t width() const {
    return static_cast<std::uint32_t>(grams.size() + aspects.size());
  }
};

Vocabulary fit_vocabulary(const std::vector<std::vector<std::string>>& gram_lists,
                          const std::vector<std::string>& companies,
                          bool binary);

std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const std::string& text);

struct SparseFeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;  // strictly increasing
  std::uint32_t width = 0;
};

// Unknown grams and unknown companies are dropped silently; gram values are
// presence flags (binary mode) or occurrence counts; the matched aspect
// column gets 1.
SparseFeatureVector vectorize(const std::vector<std::string>& grams,
                              const std::string& company,
                              const Vocabulary& vocab);

}  // namespace finsent
