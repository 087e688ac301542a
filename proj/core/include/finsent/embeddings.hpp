#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace finsent {

// Vocabulary-to-dense-vector map loaded from word2vec files. Vectors are
// stored as 32-bit floats, bit-identical to the file contents.
struct WordVectors {
  std::size_t dim = 0;
  std::vector<std::string> vocab;
  std::vector<float> matrix;  // row-major, |vocab| x dim
  std::unordered_map<std::string, std::size_t> index;

  std::span<const float> row(std::size_t i) const {
    return {matrix.data() + i * dim, dim};
  }
  // nullptr when the word is out of vocabulary.
  const float* lookup(const std::string& word) const {
    auto it = index.find(word);
    return it == index.end() ? nullptr : matrix.data() + it->second * dim;
  }
};

// The N words most cosine-similar to a seed word, in rank order.
struct ReplacementLexicon {
  std::string seed;
  std::size_t n = 0;
  std::vector<std::string> words;
};

// Binary format: ASCII header "<vocab_size> <dim>\n", then per word the
// word's bytes, a single 0x20, and dim little-endian IEEE-754 floats.
// A trailing 0x0A after each vector is tolerated on read, never written.
WordVectors load_word2vec_binary(const std::string& path);
void write_word2vec_binary(const std::string& path, const WordVectors& wv);

// Text format: header line, then "<word> <v1> ... <vdim>" lines.
WordVectors load_word2vec_text(const std::string& path);
void write_word2vec_text(const std::string& path, const WordVectors& wv);

// a.b / (|a||b|); 0 when either norm is zero (OOV vectors are all-zero and
// queries must not fail on them).
template <typename T, typename U>
double cosine_similarity_unchecked(std::span<const T> a, std::span<const U> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Throws DimensionMismatchError on unequal lengths.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Exact linear scan, descending similarity, query excluded, ties broken by
// vocabulary position. Throws UnknownWordError when query is not in vocab.
std::vector<std::pair<std::string, double>> most_similar(
    const WordVectors& wv, const std::string& query, std::size_t n);

ReplacementLexicon build_replacement_lexicon(const WordVectors& wv,
                                             const std::string& seed,
                                             std::size_t n);

}  // namespace finsent
