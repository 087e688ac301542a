#include "finsent/tokenize.hpp"

#include "finsent/unicode.hpp"

namespace finsent {
namespace {

namespace uc = finsent::unicode;

bool is_apostrophe(char32_t cp) {
  return cp == U'\'' || cp == U'’';  // ASCII and right single quote
}

// Word characters: anything that is neither whitespace nor punct/symbol.
// Letters, digits and combining marks all land here.
bool is_word_char(char32_t cp) {
  return !uc::is_space(cp) && !uc::is_punct_or_symbol(cp);
}

bool starts_url(const std::vector<char32_t>& cps, std::size_t i) {
  static const std::u32string prefixes[] = {U"http://", U"https://", U"www."};
  for (const auto& p : prefixes) {
    if (i + p.size() > cps.size()) continue;
    bool match = true;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (uc::to_lower(cps[i + k]) != p[k]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

void emit(std::vector<std::string>& out, const std::vector<char32_t>& cps,
          std::size_t begin, std::size_t end, bool lowercase) {
  std::string tok;
  for (std::size_t i = begin; i < end; ++i)
    uc::append_utf8(tok, lowercase ? uc::to_lower(cps[i]) : cps[i]);
  out.push_back(std::move(tok));
}

}  // namespace

TokenSequence whitespace_tokenize(std::string_view text, bool lowercase) {
  auto cps = uc::decode_utf8(text);
  TokenSequence seq;
  seq.source_len = cps.size();
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && uc::is_space(cps[i])) ++i;
    std::size_t start = i;
    while (i < cps.size() && !uc::is_space(cps[i])) ++i;
    if (i > start) emit(seq.tokens, cps, start, i, lowercase);
  }
  return seq;
}

TokenSequence rule_tokenize(std::string_view text, bool lowercase) {
  auto cps = uc::decode_utf8(text);
  TokenSequence seq;
  seq.source_len = cps.size();
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    char32_t c = cps[i];
    if (uc::is_space(c)) {
      ++i;
      continue;
    }
    if (starts_url(cps, i)) {
      std::size_t start = i;
      while (i < n && !uc::is_space(cps[i])) ++i;
      emit(seq.tokens, cps, start, i, lowercase);
      continue;
    }
    if (uc::is_ascii_digit(c)) {
      // Number: digits with internal '.' or ',' separators when followed
      // by another digit (3.5, 12,000, 1,234.56).
      std::size_t start = i;
      ++i;
      while (i < n) {
        if (uc::is_ascii_digit(cps[i])) {
          ++i;
        } else if ((cps[i] == U'.' || cps[i] == U',') && i + 1 < n &&
                   uc::is_ascii_digit(cps[i + 1])) {
          i += 2;
        } else {
          break;
        }
      }
      emit(seq.tokens, cps, start, i, lowercase);
      continue;
    }
    if (is_apostrophe(c)) {
      // Apostrophe plus any trailing word chars is one token ('s, 'tis, ').
      std::size_t start = i;
      ++i;
      while (i < n && is_word_char(cps[i])) ++i;
      emit(seq.tokens, cps, start, i, lowercase);
      continue;
    }
    if (is_word_char(c)) {
      std::size_t start = i;
      ++i;
      while (i < n) {
        if (is_word_char(cps[i])) {
          ++i;
        } else if (cps[i] == U'-' && i + 1 < n && is_word_char(cps[i + 1])) {
          // Internal hyphen keeps the word whole.
          i += 2;
        } else {
          break;
        }
      }
      emit(seq.tokens, cps, start, i, lowercase);
      continue;
    }
    // Punctuation or symbol: one codepoint per token.
    emit(seq.tokens, cps, i, i + 1, lowercase);
    ++i;
  }
  return seq;
}

TokenSequence tokenize(std::string_view text, TokenizerMode mode,
                       bool lowercase) {
  return mode == TokenizerMode::Whitespace
             ? whitespace_tokenize(text, lowercase)
             : rule_tokenize(text, lowercase);
}

}  // namespace finsent
