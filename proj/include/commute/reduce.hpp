#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace commute {

// Fixed-shape pairwise summation. The data is cut into blocks of
// kReduceBlock elements, each block is summed by pairwise recursion and the
// block sums are combined by the same recursion. The tree shape depends only
// on the length, so serial and OpenMP results are bit-identical.
inline constexpr std::size_t kReduceBlock = 4096;

namespace detail {
inline double pairwise(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(x, half) + pairwise(x + half, n - half);
}
} // namespace detail

namespace serial {
double pairwise_sum(std::span<const double> values);
}

namespace parallel {
double pairwise_sum(std::span<const double> values);
}

inline double pairwise_sum(std::span<const double> values) {
  return parallel::pairwise_sum(values);
}

} // namespace commute
