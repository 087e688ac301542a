#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Minimal Unicode support for text canonicalization and tokenization:
// UTF-8 codec, whitespace/punctuation classification, simple lowercasing
// and NFC normalization. Backed by tables generated from the Unicode
// database (see tools/gen_unicode_tables.py).
namespace finsent::unicode {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes UTF-8; malformed byte sequences become U+FFFD (one per bad byte).
std::vector<char32_t> decode_utf8(std::string_view text);

std::string encode_utf8(const std::vector<char32_t>& codepoints);
void append_utf8(std::string& out, char32_t cp);

// Whitespace per Python's str.isspace: Unicode White_Space plus the
// C0 separators U+001C..U+001F.
bool is_space(char32_t cp);

// Unicode general categories P* and S*.
bool is_punct_or_symbol(char32_t cp);

bool is_ascii_digit(char32_t cp);

// Simple (1:1) lowercase mapping; codepoints without one are unchanged.
char32_t to_lower(char32_t cp);
std::string to_lower_str(std::string_view text);

// Canonical composition normal form.
std::string nfc(std::string_view text);

// Codepoint count (malformed bytes count as one each).
std::size_t length(std::string_view text);

}  // namespace finsent::unicode
