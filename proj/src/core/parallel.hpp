#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace splitcv {

// 0 means "use the hardware parallelism".
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on up to `threads` workers. `on_done(i)` is
// invoked in strictly increasing index order, each call happening once every
// index <= i has finished, whatever the schedule. If any body throws, the
// exception from the lowest failing index is rethrown after all workers stop.
inline void parallel_for_ordered(std::size_t n, unsigned threads,
                                 const std::function<void(std::size_t)>& body,
                                 const std::function<void(std::size_t)>& on_done = {}) {
  if (n == 0) return;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));

  std::vector<std::exception_ptr> errors(n);
  std::vector<char> done(n, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex flush_mutex;
  std::size_t flushed = 0;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
        return;
      }
      std::lock_guard lock(flush_mutex);
      done[i] = 1;
      while (flushed < n && done[flushed] && !failed.load()) {
        try {
          if (on_done) on_done(flushed);
        } catch (...) {
          errors[flushed] = std::current_exception();
          failed.store(true);
        }
        ++flushed;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  parallel_for_ordered(n, threads, body);
}

}  // namespace splitcv
