#pragma once

// Minimal data-parallel helper.  Grid sweeps are embarrassingly parallel
// (independent nodes / independent r-rows), so a static chunking over raw
// std::thread is all we need.  The worker count is process-global and can be
// set once by the CLI (--threads / VORTEX_SHOCK_THREADS); library callers may
// also pass an explicit count.

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace vshock {

inline std::atomic<int>& thread_count_slot() {
  static std::atomic<int> count{0};  // 0 = "use hardware concurrency"
  return count;
}

inline void set_thread_count(int n) { thread_count_slot().store(n > 0 ? n : 0); }

inline int thread_count() {
  int n = thread_count_slot().load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Run fn(i) for i in [0, n).  Chunks are contiguous so warm-start patterns
// (e.g. continuation along a row) stay intact within a chunk.  Exceptions
// from workers are captured and the first one is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
  if (threads <= 0) threads = thread_count();
  std::size_t nt = static_cast<std::size_t>(threads);
  if (nt > n) nt = n;
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::vector<std::exception_ptr> errors(nt);
  std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t w = 0; w < nt; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = lo + chunk < n ? lo + chunk : n;
    pool.emplace_back([lo, hi, w, &fn, &errors] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace vshock
