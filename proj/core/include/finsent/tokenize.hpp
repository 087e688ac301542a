#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace finsent {

struct TokenSequence {
  std::vector<std::string> tokens;  // non-empty, no whitespace inside
  std::size_t source_len = 0;       // codepoint count of the input
};

enum class TokenizerMode { Whitespace, Rules };

// Splits on maximal runs of Unicode whitespace.
TokenSequence whitespace_tokenize(std::string_view text, bool lowercase = true);

// Rule-based tokenizer. The frozen rule list:
//   - punctuation and symbol codepoints become single-character tokens
//   - decimal/grouped numbers stay whole (3.5, 12,000)
//   - currency symbols separate from amounts ($5 -> $ 5)
//   - http(s):// and www. URLs stay whole up to the next whitespace
//   - hyphenated words stay whole (pre-tax)
//   - apostrophe suffixes split off (uk's -> uk 's, shares' -> shares ')
// Changing any rule requires regenerating tests/golden/tokenizer_golden.tsv.
TokenSequence rule_tokenize(std::string_view text, bool lowercase = true);

TokenSequence tokenize(std::string_view text, TokenizerMode mode,
                       bool lowercase = true);

}  // namespace finsent
