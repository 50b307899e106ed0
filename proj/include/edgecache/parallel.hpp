#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include "edgecache/types.hpp"

namespace edgecache {

/// Runs body(i) for i in [0, count), under OpenMP when exec is Parallel.
/// Exceptions cannot cross an OpenMP region, so the one from the lowest
/// index is captured and rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t count, Exec exec, Body&& body) {
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex guard;
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(i) < error_index) {
        error_index = static_cast<std::size_t>(i);
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace edgecache
