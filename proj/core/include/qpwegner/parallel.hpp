// Deterministic fan-out over an index range. Work is split into contiguous
// chunks and every result is keyed by its index, so the output of a run is
// identical at any thread count.
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qpwegner {

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& body) {
  if (threads <= 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
  const std::int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = static_cast<std::int64_t>(w) * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body, &first_error, &error_mutex] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qpwegner
