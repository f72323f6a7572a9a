#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace segmvs {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

/// Runs fn(i) for i in [begin, end) on contiguous chunks. Work items must be
/// independent; determinism is the items' responsibility, not the scheduler's.
inline void parallel_for(long begin, long end, int threads, const std::function<void(long)>& fn) {
  const long n = end - begin;
  if (n <= 0) return;
  threads = std::min<long>(resolve_threads(threads), n);
  if (threads <= 1) {
    for (long i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(size_t(threads));
  const long chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = begin + t * chunk;
    const long hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace segmvs
