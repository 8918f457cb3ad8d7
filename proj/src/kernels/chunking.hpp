#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include "daql/kernels.hpp"

namespace daql::kernels {

/// Spread the bits of `k` at and above `stride` one position up, leaving a
/// zero at the `stride` bit.
inline std::size_t insert_zero_bit(std::size_t k, std::size_t stride) {
  return ((k & ~(stride - 1)) << 1) | (k & (stride - 1));
}

inline std::pair<std::size_t, std::size_t> chunk_range(std::size_t size, std::size_t chunk) {
  const std::size_t per = (size + kReductionChunks - 1) / kReductionChunks;
  const std::size_t begin = std::min(size, chunk * per);
  const std::size_t end = std::min(size, begin + per);
  return {begin, end};
}

template <typename T>
T sum_chunks(const std::array<T, kReductionChunks>& partial) {
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

}  // namespace daql::kernels
