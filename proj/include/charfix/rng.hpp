#pragma once

#include <cstdint>

namespace charfix {

// Deterministic splitmix64 stream. Used instead of <random> engines so that
// byte-identical output is guaranteed across platforms and standard library
// versions, and so that per-sentence streams can be derived from
// (seed, index) without generating the whole sequence in order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for item `index` under a corpus-level seed.
  static Rng for_index(std::uint64_t seed, std::uint64_t index) {
    Rng r(mix(seed + 0x9e3779b97f4a7c15ull * (index + 1)));
    r.next_u64();
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    // multiply-shift; bias is < 2^-64 * n, irrelevant at the n used here
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Index drawn proportionally to non-negative weights[0..n).
  std::size_t weighted(const double* weights, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += weights[i];
    double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return n - 1;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace charfix
