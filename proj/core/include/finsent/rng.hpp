#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace finsent {

// SplitMix64. Chosen over std::mt19937 + std::uniform_* because the standard
// distributions are implementation-defined; this generator produces the same
// stream on every platform, which the determinism contracts depend on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform index in [0, bound). bound must be > 0.
  std::size_t uniform_index(std::size_t bound) {
    // Multiply-shift mapping; bias is negligible for bound << 2^64.
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Fisher-Yates. std::shuffle is not used for the same portability reason.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a root seed and a label, so every
// consumer of randomness (init, shuffle, dropout, ...) gets its own stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  Rng mix(root ^ h);
  return mix.next_u64();
}

}  // namespace finsent
