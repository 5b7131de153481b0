#pragma once

#include <exception>
#include <mutex>

namespace ddsplit {

/// Runs body(k) for k in [0, n) on up to `threads` threads. Each index
/// writes its own output slot, so results do not depend on scheduling.
/// The first exception (lowest index) is rethrown after the loop.
template <typename Body>
void parallel_for(int n, int threads, Body&& body) {
  if (threads <= 1 || n <= 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::exception_ptr error;
  int error_index = n;
  std::mutex mutex;
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k < n; ++k) {
    try {
      body(k);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex);
      if (k < error_index) {
        error_index = k;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ddsplit
