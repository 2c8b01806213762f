#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sigw {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> threads{0};
  return threads;
}
inline thread_local bool inside_parallel_region = false;
}  // namespace detail

/// Number of worker threads used by parallel_for. 0 means
/// std::thread::hardware_concurrency().
inline void set_thread_count(unsigned threads) { detail::thread_setting() = threads; }

inline unsigned thread_count() {
  const unsigned t = detail::thread_setting();
  if (t != 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n), handing indices out dynamically. The caller
/// owns any reduction, so results written to per-index slots do not depend
/// on the thread count. The first exception thrown is rethrown. Calls made
/// from inside a worker run serially.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = detail::inside_parallel_region ? 1 : std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    const bool outer = detail::inside_parallel_region;
    detail::inside_parallel_region = true;
    struct Reset {
      bool value;
      ~Reset() { detail::inside_parallel_region = value; }
    } reset{outer};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sigw
