#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace hivqe {

/// Worker count: HIVQE_THREADS if set and positive, otherwise the hardware
/// concurrency.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("HIVQE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) over contiguous blocks. Each index is handled
/// by exactly one thread, so results written per index are independent of
/// the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_block = 256) {
  const std::size_t threads =
      std::min<std::size_t>(worker_threads(), (n + min_block - 1) / std::max<std::size_t>(min_block, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t block = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hivqe
