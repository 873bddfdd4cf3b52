#pragma once

#include <cstddef>
#include <span>

namespace ym {

/// Index-ascending pairwise-tree summation. Every reduction in this library
/// (norms, energies, inner products) goes through this so results are
/// bit-reproducible independent of thread count.
inline double pairwise_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

}  // namespace ym
