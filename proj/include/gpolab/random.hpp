#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gpolab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive hash of a list of 64-bit words.
inline std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t w : words) h = splitmix64(h ^ splitmix64(w));
  return h;
}

/// Seeded 64-bit Mersenne Twister that remembers its seed so noise
/// provenance can be recorded next to the data it produced.
class RandomStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Counter-based child stream: seed' = seed xor hash(words...).
  static RandomStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    return RandomStream(seed ^ hash_words(words));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

  /// Beta(a, b) via the gamma ratio.
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace gpolab
