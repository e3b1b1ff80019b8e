#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace percolab {

// Runs body(i) for i in [0, count) on the OpenMP pool. The first exception
// thrown by any iteration is rethrown on the calling thread once the loop
// drains. Callers write results into per-index slots, so output does not
// depend on scheduling.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  std::exception_ptr failure;
  std::mutex guard;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace percolab
