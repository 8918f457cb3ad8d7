#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace daql::detail {

/// Runs fn(i) for i in [0, count) across OpenMP threads. Each index must
/// write only its own output slot. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  std::exception_ptr error;
  std::mutex mutex;
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace daql::detail
