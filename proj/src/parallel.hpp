#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace concdiam::detail {

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned w = requested == 0 ? hw : requested;
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(w, jobs)));
}

/// Calls body(begin, end) on contiguous chunks of [0, count) across up to
/// `threads` workers (0 = hardware concurrency). The first exception thrown by
/// any chunk is rethrown after all workers join.
template <class Body>
void parallel_chunks(std::size_t count, unsigned threads, Body&& body) {
  if (count == 0) return;
  const unsigned workers = worker_count(threads, count);
  if (workers == 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t per = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, per * w);
    const std::size_t end = std::min(count, begin + per);
    if (begin == end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Calls body(k) for every k in [0, count), handing out indices dynamically.
template <class Body>
void parallel_for_each(std::size_t count, unsigned threads, Body&& body) {
  if (count == 0) return;
  const unsigned workers = worker_count(threads, count);
  std::atomic<std::size_t> next{0};
  parallel_chunks(workers, workers, [&](std::size_t, std::size_t) {
    for (std::size_t k = next++; k < count; k = next++) body(k);
  });
}

}  // namespace concdiam::detail
