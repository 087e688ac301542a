#include "finsent/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "finsent/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "word2vec binary I/O assumes a little-endian host");

namespace finsent {
namespace {

void finish_load(WordVectors& wv) {
  for (std::size_t i = 0; i < wv.vocab.size(); ++i) {
    const std::string& w = wv.vocab[i];
    if (w.empty()) throw FormatError("empty word at index " + std::to_string(i));
    if (!wv.index.emplace(w, i).second)
      throw DuplicateWordError("'" + w + "' appears twice");
  }
  for (float v : wv.matrix) {
    if (!std::isfinite(v)) throw FormatError("non-finite vector entry");
  }
}

std::pair<std::size_t, std::size_t> parse_header(const std::string& line) {
  std::istringstream hs(line);
  long long vocab_size = -1, dim = -1;
  if (!(hs >> vocab_size >> dim) || vocab_size <= 0 || dim <= 0) {
    throw FormatError("bad header '" + line + "'");
  }
  std::string rest;
  if (hs >> rest) throw FormatError("trailing header content '" + rest + "'");
  return {static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(dim)};
}

}  // namespace

WordVectors load_word2vec_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw FormatError("missing header");
  auto [vocab_size, dim] = parse_header(header);

  WordVectors wv;
  wv.dim = dim;
  wv.vocab.reserve(vocab_size);
  wv.matrix.resize(vocab_size * dim);

  for (std::size_t w = 0; w < vocab_size; ++w) {
    std::string word;
    int c;
    while ((c = in.get()) != EOF && c != 0x20) word.push_back(static_cast<char>(c));
    if (c == EOF)
      throw FormatError("truncated file: header promises " +
                        std::to_string(vocab_size) + " words, found " +
                        std::to_string(w));
    if (!in.read(reinterpret_cast<char*>(wv.matrix.data() + w * dim),
                 static_cast<std::streamsize>(dim * sizeof(float))))
      throw FormatError("truncated vector for word '" + word + "'");
    wv.vocab.push_back(std::move(word));
    if (in.peek() == 0x0A) in.get();  // tolerated, not required
  }
  finish_load(wv);
  return wv;
}

void write_word2vec_binary(const std::string& path, const WordVectors& wv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << wv.vocab.size() << ' ' << wv.dim << '\n';
  for (std::size_t w = 0; w < wv.vocab.size(); ++w) {
    out << wv.vocab[w] << ' ';
    out.write(reinterpret_cast<const char*>(wv.matrix.data() + w * wv.dim),
              static_cast<std::streamsize>(wv.dim * sizeof(float)));
  }
  if (!out) throw FormatError("write failed for '" + path + "'");
}

WordVectors load_word2vec_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw FormatError("missing header");
  auto [vocab_size, dim] = parse_header(header);

  WordVectors wv;
  wv.dim = dim;
  wv.vocab.reserve(vocab_size);
  wv.matrix.resize(vocab_size * dim);

  std::string line;
  for (std::size_t w = 0; w < vocab_size; ++w) {
    if (!std::getline(in, line))
      throw FormatError("truncated file: header promises " +
                        std::to_string(vocab_size) + " words, found " +
                        std::to_string(w));
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) throw FormatError("blank record at word " + std::to_string(w));
    for (std::size_t d = 0; d < dim; ++d) {
      if (!(ls >> wv.matrix[w * dim + d]))
        throw FormatError("word '" + word + "' has fewer than " +
                          std::to_string(dim) + " values");
    }
    std::string extra;
    if (ls >> extra)
      throw FormatError("word '" + word + "' has more than " +
                        std::to_string(dim) + " values");
    wv.vocab.push_back(std::move(word));
  }
  finish_load(wv);
  return wv;
}

void write_word2vec_text(const std::string& path, const WordVectors& wv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << wv.vocab.size() << ' ' << wv.dim << '\n';
  char buf[64];
  for (std::size_t w = 0; w < wv.vocab.size(); ++w) {
    out << wv.vocab[w];
    for (std::size_t d = 0; d < wv.dim; ++d) {
      // %.9g round-trips binary32 exactly.
      std::snprintf(buf, sizeof(buf), "%.9g", wv.matrix[w * wv.dim + d]);
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed for '" + path + "'");
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw DimensionMismatchError("vector lengths " + std::to_string(a.size()) +
                                 " vs " + std::to_string(b.size()));
  return cosine_similarity_unchecked(a, b);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionMismatchError("vector lengths " + std::to_string(a.size()) +
                                 " vs " + std::to_string(b.size()));
  return cosine_similarity_unchecked(a, b);
}

std::vector<std::pair<std::string, double>> most_similar(
    const WordVectors& wv, const std::string& query, std::size_t n) {
  auto it = wv.index.find(query);
  if (it == wv.index.end()) throw UnknownWordError("'" + query + "'");
  if (n < 1) return {};
  std::size_t q = it->second;

  std::vector<std::pair<double, std::size_t>> scored;  // (-sim, index)
  scored.reserve(wv.vocab.size() - 1);
  for (std::size_t i = 0; i < wv.vocab.size(); ++i) {
    if (i == q) continue;
    scored.emplace_back(-cosine_similarity_unchecked(wv.row(q), wv.row(i)), i);
  }
  std::size_t take = std::min(n, scored.size());
  // (-sim, index) sorts descending by similarity with vocab-order ties.
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end());

  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.emplace_back(wv.vocab[scored[i].second], -scored[i].first);
  return out;
}

ReplacementLexicon build_replacement_lexicon(const WordVectors& wv,
                                             const std::string& seed,
                                             std::size_t n) {
  ReplacementLexicon lex;
  lex.seed = seed;
  lex.n = n;
  for (auto& [word, sim] : most_similar(wv, seed, n))
    lex.words.push_back(std::move(word));
  return lex;
}

}  // namespace finsent
