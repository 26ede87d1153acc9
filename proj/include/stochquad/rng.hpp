#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stochquad {

namespace detail {
// SplitMix64 finaliser; used to derive well-separated child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic random stream. All variate generation is implemented on top
/// of the raw mt19937_64 output so results are identical across standard
/// libraries and platforms.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(detail::splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1); rejects the (astronomically rare) exact zero.
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (no cached spare, keeps the stream simple).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Modulo bias is < 2^-40 for the pool sizes used here.
    return engine_() % n;
  }

  /// Deterministically derived child stream; independent of this stream's
  /// current position, so `substream(seed, tag)` is a pure function.
  RandomStream substream(std::uint64_t tag) const {
    return RandomStream(detail::splitmix64(seed_ ^ detail::splitmix64(tag + 0x51ed2701a3c4f9b7ULL)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace stochquad
