#include "commute/reduce.hpp"

#include "commute/parallel.hpp"

namespace commute {

namespace {
std::size_t block_count(std::size_t n) { return (n + kReduceBlock - 1) / kReduceBlock; }
} // namespace

double serial::pairwise_sum(std::span<const double> values) {
  const std::size_t nb = block_count(values.size());
  std::vector<double> partial(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kReduceBlock;
    const std::size_t len = std::min(kReduceBlock, values.size() - lo);
    partial[b] = detail::pairwise(values.data() + lo, len);
  }
  return detail::pairwise(partial.data(), partial.size());
}

double parallel::pairwise_sum(std::span<const double> values) {
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(block_count(values.size()));
  std::vector<double> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t len = std::min(kReduceBlock, values.size() - lo);
    partial[static_cast<std::size_t>(b)] = detail::pairwise(values.data() + lo, len);
  }
  return detail::pairwise(partial.data(), partial.size());
}

} // namespace commute
