#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace compdyn {

// SplitMix64 finalizer; used for seed derivation only.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream derivation rule. A child seed is obtained by folding each tag into
/// the parent with SplitMix64:
///
///   s_0 = parent;  s_{k+1} = splitmix64(s_k ^ splitmix64(tag_k + k))
///
/// Tags are small integers naming task, module and instance (see
/// `stream` below), so every random draw in a run is a pure function of the
/// master seed and its position in that hierarchy.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t s = parent;
  std::uint64_t k = 0;
  for (auto tag : tags) {
    s = splitmix64(s ^ splitmix64(tag + k));
    ++k;
  }
  return s;
}

// Module-level stream tags.
namespace stream {
inline constexpr std::uint64_t graph = 1;
inline constexpr std::uint64_t omega = 2;
inline constexpr std::uint64_t phases = 3;
inline constexpr std::uint64_t design = 4;
inline constexpr std::uint64_t acquisition = 5;
inline constexpr std::uint64_t permutation = 6;
inline constexpr std::uint64_t basin = 7;
}  // namespace stream

/// 64-bit Mersenne Twister with library-independent derived draws, so results
/// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection-sampled (unbiased).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::span<T> v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    shuffle(std::span<T>(v));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace compdyn
