#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace atlas {

/// Upper bound on workers from ATLAS_SIM_THREADS (0 when unset or invalid).
inline unsigned thread_cap() {
  if (const char* env = std::getenv("ATLAS_SIM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

/// Hardware concurrency, capped by ATLAS_SIM_THREADS when set.
inline unsigned default_threads() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned cap = thread_cap();
  return cap > 0 ? std::min(hw, cap) : hw;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Indices are handed
/// out dynamically; callers write results into slot i so the outcome does not
/// depend on the schedule. The first exception is rethrown after all workers
/// stop.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace atlas
