#pragma once

#include <cstddef>
#include <span>

namespace stochquad {

/// Pairwise (cascade) summation. Deterministic tree shape for a given length,
/// keeps rounding drift at O(log n) ulps instead of O(n).
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Unbiased sample variance (n-1 normalisation) with a two-pass algorithm.
inline double sample_variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double mean = pairwise_sum(xs) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

inline double sample_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

}  // namespace stochquad
