#!/usr/bin/env python3
"""Regenerates core/src/unicode_tables.inc from Python's Unicode database.

The tables back UTF-8 aware whitespace detection, simple lowercasing, NFC
normalization and punctuation classification in core/src/unicode.cpp.
Run from the repository root:

    python3 tools/gen_unicode_tables.py > core/src/unicode_tables.inc
"""
import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_S_BASE, HANGUL_S_COUNT = 0xAC00, 11172


def hangul(cp):
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def main(out):
    w = out.write
    w("// Generated by tools/gen_unicode_tables.py (Unicode %s via Python %s).\n"
      % (unicodedata.unidata_version, ".".join(map(str, sys.version_info[:3]))))
    w("// Do not edit by hand; regenerate instead.\n\n")

    # Whitespace: Python str.isspace semantics, i.e. Unicode White_Space plus
    # the C0 separators 0x1C-0x1F. Token invariants rely on 0x1F (the bigram
    # join byte) being a separator.
    ws = [cp for cp in range(MAX_CP) if chr(cp).isspace()]
    w("static constexpr uint32_t kWhitespace[] = {\n  %s\n};\n\n"
      % ", ".join("0x%X" % cp for cp in ws))

    # Simple lowercase map: 1:1 mappings only (multi-char lowerings such as
    # U+0130 are left unchanged).
    lower = []
    for cp in range(MAX_CP):
        lc = chr(cp).lower()
        if len(lc) == 1 and lc != chr(cp):
            lower.append((cp, ord(lc)))
    w("struct CpPair { uint32_t from; uint32_t to; };\n")
    w("static constexpr CpPair kLowercase[] = {\n")
    for cp, lc in lower:
        w("  {0x%X, 0x%X},\n" % (cp, lc))
    w("};\n\n")

    # Canonical combining classes (nonzero only).
    ccc = [(cp, unicodedata.combining(chr(cp)))
           for cp in range(MAX_CP) if unicodedata.combining(chr(cp))]
    w("struct CpClass { uint32_t cp; uint8_t ccc; };\n")
    w("static constexpr CpClass kCombiningClass[] = {\n")
    for cp, c in ccc:
        w("  {0x%X, %d},\n" % (cp, c))
    w("};\n\n")

    # Full canonical decompositions (NFD of the single codepoint), flattened
    # into one pool. Hangul syllables are decomposed algorithmically at
    # runtime and excluded here.
    pool = []
    decomp = []
    for cp in range(MAX_CP):
        if hangul(cp):
            continue
        nfd = [ord(c) for c in unicodedata.normalize("NFD", chr(cp))]
        if nfd != [cp]:
            decomp.append((cp, len(pool), len(nfd)))
            pool.extend(nfd)
    w("struct Decomp { uint32_t cp; uint32_t offset; uint32_t len; };\n")
    w("static constexpr Decomp kDecomp[] = {\n")
    for cp, off, n in decomp:
        w("  {0x%X, %d, %d},\n" % (cp, off, n))
    w("};\n")
    w("static constexpr uint32_t kDecompPool[] = {\n  %s\n};\n\n"
      % ",\n  ".join(", ".join("0x%X" % c for c in pool[i:i + 12])
                     for i in range(0, len(pool), 12)))

    # Primary composition pairs: first-level canonical pairs that recompose
    # under NFC (composition exclusions drop out automatically).
    comps = []
    for cp in range(MAX_CP):
        if hangul(cp):
            continue
        d = unicodedata.decomposition(chr(cp))
        if not d or d.startswith("<"):
            continue
        parts = [int(x, 16) for x in d.split()]
        if len(parts) != 2:
            continue
        if unicodedata.normalize("NFC", chr(parts[0]) + chr(parts[1])) == chr(cp):
            comps.append(((parts[0] << 32) | parts[1], cp))
    comps.sort()
    w("struct CompPair { uint64_t key; uint32_t composed; };\n")
    w("static constexpr CompPair kCompose[] = {\n")
    for key, cp in comps:
        w("  {0x%XULL, 0x%X},\n" % (key, cp))
    w("};\n\n")

    # Punctuation and symbol ranges (general categories P* and S*).
    marks = [cp for cp in range(MAX_CP)
             if unicodedata.category(chr(cp))[0] in "PS"]
    ranges = []
    for cp in marks:
        if ranges and ranges[-1][1] + 1 == cp:
            ranges[-1][1] = cp
        else:
            ranges.append([cp, cp])
    w("struct CpRange { uint32_t lo; uint32_t hi; };\n")
    w("static constexpr CpRange kPunctOrSymbol[] = {\n  %s\n};\n"
      % ",\n  ".join(", ".join("{0x%X, 0x%X}" % (lo, hi)
                               for lo, hi in ranges[i:i + 6])
                     for i in range(0, len(ranges), 6)))


if __name__ == "__main__":
    main(sys.stdout)
