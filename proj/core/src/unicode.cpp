#include "finsent/unicode.hpp"

#include <algorithm>

namespace finsent::unicode {
namespace {

#include "unicode_tables.inc"

// Hangul syllable composition/decomposition is algorithmic (UAX #15 §3.12).
constexpr char32_t kHangulSBase = 0xAC00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11A7;
constexpr int kHangulLCount = 19;
constexpr int kHangulVCount = 21;
constexpr int kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
constexpr int kHangulSCount = kHangulLCount * kHangulNCount;

uint8_t combining_class(char32_t cp) {
  auto it = std::lower_bound(
      std::begin(kCombiningClass), std::end(kCombiningClass), cp,
      [](const CpClass& e, char32_t c) { return e.cp < c; });
  if (it != std::end(kCombiningClass) && it->cp == cp) return it->ccc;
  return 0;
}

void decompose_cp(char32_t cp, std::vector<char32_t>& out) {
  if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
    char32_t s = cp - kHangulSBase;
    out.push_back(kHangulLBase + s / kHangulNCount);
    out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
    char32_t t = s % kHangulTCount;
    if (t != 0) out.push_back(kHangulTBase + t);
    return;
  }
  auto it = std::lower_bound(std::begin(kDecomp), std::end(kDecomp), cp,
                             [](const Decomp& e, char32_t c) { return e.cp < c; });
  if (it != std::end(kDecomp) && it->cp == cp) {
    for (uint32_t i = 0; i < it->len; ++i)
      out.push_back(kDecompPool[it->offset + i]);
    return;
  }
  out.push_back(cp);
}

// Returns 0 when the pair does not compose.
char32_t compose_pair(char32_t a, char32_t b) {
  // Hangul L+V and LV+T.
  if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount &&
      b >= kHangulVBase && b < kHangulVBase + kHangulVCount) {
    return kHangulSBase +
           ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) *
               kHangulTCount;
  }
  if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
      (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
      b < kHangulTBase + kHangulTCount) {
    return a + (b - kHangulTBase);
  }
  uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
  auto it = std::lower_bound(
      std::begin(kCompose), std::end(kCompose), key,
      [](const CompPair& e, uint64_t k) { return e.key < k; });
  if (it != std::end(kCompose) && it->key == key) return it->composed;
  return 0;
}

// Canonical ordering: stable bubble of combining marks by ccc.
void canonical_order(std::vector<char32_t>& cps) {
  for (std::size_t i = 1; i < cps.size(); ++i) {
    uint8_t c = combining_class(cps[i]);
    if (c == 0) continue;
    std::size_t j = i;
    while (j > 0) {
      uint8_t prev = combining_class(cps[j - 1]);
      if (prev == 0 || prev <= c) break;
      std::swap(cps[j - 1], cps[j]);
      --j;
    }
  }
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char b0 = text[i];
    char32_t cp = kReplacementChar;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacementChar);
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(kReplacementChar);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char b = text[i + k];
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range values.
    static constexpr char32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (!ok || cp < kMinByLen[len] || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacementChar);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(const std::vector<char32_t>& codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (char32_t cp : codepoints) append_utf8(out, cp);
  return out;
}

bool is_space(char32_t cp) {
  return std::binary_search(std::begin(kWhitespace), std::end(kWhitespace),
                            static_cast<uint32_t>(cp));
}

bool is_punct_or_symbol(char32_t cp) {
  auto it = std::upper_bound(
      std::begin(kPunctOrSymbol), std::end(kPunctOrSymbol), cp,
      [](char32_t c, const CpRange& r) { return c < r.lo; });
  if (it == std::begin(kPunctOrSymbol)) return false;
  --it;
  return cp >= it->lo && cp <= it->hi;
}

bool is_ascii_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

char32_t to_lower(char32_t cp) {
  auto it = std::lower_bound(std::begin(kLowercase), std::end(kLowercase), cp,
                             [](const CpPair& e, char32_t c) { return e.from < c; });
  if (it != std::end(kLowercase) && it->from == cp) return it->to;
  return cp;
}

std::string to_lower_str(std::string_view text) {
  auto cps = decode_utf8(text);
  for (auto& cp : cps) cp = to_lower(cp);
  return encode_utf8(cps);
}

std::string nfc(std::string_view text) {
  std::vector<char32_t> decomposed;
  for (char32_t cp : decode_utf8(text)) decompose_cp(cp, decomposed);
  canonical_order(decomposed);

  // Canonical composition (UAX #15). A combining mark composes with the
  // last starter unless a preceding mark with ccc >= its own blocks it.
  std::vector<char32_t> out;
  out.reserve(decomposed.size());
  std::ptrdiff_t last_starter = -1;
  for (char32_t cp : decomposed) {
    if (last_starter >= 0) {
      bool blocked = false;
      if (static_cast<std::ptrdiff_t>(out.size()) - 1 > last_starter) {
        uint8_t prev = combining_class(out.back());
        uint8_t cur = combining_class(cp);
        blocked = prev == 0 || prev >= cur;
      }
      if (!blocked) {
        if (char32_t composed = compose_pair(out[last_starter], cp)) {
          out[last_starter] = composed;
          continue;
        }
      }
    }
    out.push_back(cp);
    if (combining_class(cp) == 0)
      last_starter = static_cast<std::ptrdiff_t>(out.size()) - 1;
  }
  return encode_utf8(out);
}

std::size_t length(std::string_view text) { return decode_utf8(text).size(); }

}  // namespace finsent::unicode
