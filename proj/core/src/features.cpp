#include "finsent/features.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "finsent/errors.hpp"
#include "finsent/unicode.hpp"
#include "json.hpp"

namespace finsent {
namespace {

const std::string kRawEscapePrefix = "⟨RAW⟩";

}  // namespace

bool is_reserved_token(const std::string& token) {
  return token == kCompanyToken || token == kPositiveToken ||
         token == kNegativeToken;
}

std::string escape_reserved(const std::string& token) {
  return is_reserved_token(token) ? kRawEscapePrefix + token : token;
}

ReplacementConfig ReplacementConfig::build(
    const std::vector<std::string>& company_names, TokenizerMode mode,
    ReplacementLexicon positive, ReplacementLexicon negative,
    bool replace_company, bool replace_positive, bool replace_negative) {
  ReplacementConfig cfg;
  cfg.replace_company = replace_company;
  cfg.replace_positive = replace_positive;
  cfg.replace_negative = replace_negative;

  std::set<std::vector<std::string>> seqs;
  for (const auto& name : company_names) {
    auto toks = tokenize(name, mode, /*lowercase=*/true).tokens;
    for (auto& t : toks) t = escape_reserved(t);
    if (!toks.empty()) seqs.insert(std::move(toks));
  }
  cfg.company_sequences.assign(seqs.begin(), seqs.end());
  // Longest first so multi-token names win over their own prefixes.
  std::stable_sort(cfg.company_sequences.begin(), cfg.company_sequences.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  for (auto& w : positive.words) w = escape_reserved(w);
  for (auto& w : negative.words) w = escape_reserved(w);
  cfg.positive_words.insert(positive.words.begin(), positive.words.end());
  cfg.negative_words.insert(negative.words.begin(), negative.words.end());
  cfg.positive = std::move(positive);
  cfg.negative = std::move(negative);
  return cfg;
}

TokenSequence apply_replacements(const TokenSequence& tokens,
                                 const ReplacementConfig& cfg) {
  TokenSequence out;
  out.source_len = tokens.source_len;
  out.tokens.reserve(tokens.tokens.size());

  std::vector<std::string> lowered;
  lowered.reserve(tokens.tokens.size());
  for (const auto& t : tokens.tokens) lowered.push_back(unicode::to_lower_str(t));

  std::size_t i = 0;
  const std::size_t n = tokens.tokens.size();
  while (i < n) {
    if (cfg.replace_company) {
      std::size_t matched = 0;
      for (const auto& seq : cfg.company_sequences) {
        if (seq.size() > n - i) continue;
        if (std::equal(seq.begin(), seq.end(), lowered.begin() + i)) {
          matched = seq.size();
          break;
        }
      }
      if (matched > 0) {
        out.tokens.push_back(kCompanyToken);
        i += matched;
        continue;
      }
    }
    const std::string& tok = tokens.tokens[i];
    if (cfg.replace_positive && cfg.positive_words.count(tok)) {
      out.tokens.push_back(kPositiveToken);
    } else if (cfg.replace_negative && cfg.negative_words.count(tok)) {
      out.tokens.push_back(kNegativeToken);
    } else {
      out.tokens.push_back(tok);
    }
    ++i;
  }
  return out;
}

std::vector<std::string> extract_ngrams(const TokenSequence& tokens,
                                        NgramOrders orders) {
  const auto& t = tokens.tokens;
  std::vector<std::string> grams;
  if (orders.unigrams) grams.insert(grams.end(), t.begin(), t.end());
  if (orders.bigrams) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      grams.push_back(t[i] + kBigramSeparator + t[i + 1]);
  }
  return grams;
}

std::string aspect_key(const std::string& company) {
  auto cps = unicode::decode_utf8(company);
  std::size_t b = 0, e = cps.size();
  while (b < e && unicode::is_space(cps[b])) ++b;
  while (e > b && unicode::is_space(cps[e - 1])) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i)
    unicode::append_utf8(out, unicode::to_lower(cps[i]));
  return out;
}

Vocabulary fit_vocabulary(
    const std::vector<std::vector<std::string>>& gram_lists,
    const std::vector<std::string>& companies, bool binary) {
  Vocabulary vocab;
  vocab.binary = binary;
  for (const auto& grams : gram_lists) {
    for (const auto& g : grams) {
      if (vocab.gram_index.emplace(g, vocab.grams.size()).second)
        vocab.grams.push_back(g);
    }
  }
  std::uint32_t base = static_cast<std::uint32_t>(vocab.grams.size());
  for (const auto& c : companies) {
    std::string key = aspect_key(c);
    if (key.empty()) continue;
    if (vocab.aspect_index.emplace(key, base + vocab.aspects.size()).second)
      vocab.aspects.push_back(key);
  }
  return vocab;
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["binary"] = vocab.binary;
  doc["grams"] = vocab.grams;
  doc["aspects"] = vocab.aspects;
  return doc.dump(2) + "\n";
}

Vocabulary vocabulary_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid vocabulary JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != 1)
    throw FormatError("unsupported vocabulary version");
  Vocabulary vocab;
  vocab.binary = doc.at("binary").get<bool>();
  vocab.grams = doc.at("grams").get<std::vector<std::string>>();
  vocab.aspects = doc.at("aspects").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < vocab.grams.size(); ++i) {
    if (!vocab.gram_index.emplace(vocab.grams[i], i).second)
      throw FormatError("duplicate gram in vocabulary file");
  }
  for (std::size_t i = 0; i < vocab.aspects.size(); ++i) {
    if (!vocab.aspect_index
             .emplace(vocab.aspects[i], vocab.grams.size() + i)
             .second)
      throw FormatError("duplicate aspect in vocabulary file");
  }
  return vocab;
}

SparseFeatureVector vectorize(const std::vector<std::string>& grams,
                              const std::string& company,
                              const Vocabulary& vocab) {
  std::map<std::uint32_t, double> cols;
  for (const auto& g : grams) {
    auto it = vocab.gram_index.find(g);
    if (it == vocab.gram_index.end()) continue;
    if (vocab.binary) {
      cols[it->second] = 1.0;
    } else {
      cols[it->second] += 1.0;
    }
  }
  auto ai = vocab.aspect_index.find(aspect_key(company));
  if (ai != vocab.aspect_index.end()) cols[ai->second] = 1.0;

  SparseFeatureVector v;
  v.width = vocab.width();
  v.entries.assign(cols.begin(), cols.end());
  return v;
}

}  // namespace finsent
