#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace erblock {

/// Hardware concurrency with a floor of one.
inline unsigned default_workers() noexcept {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `workers`
/// threads. Chunk boundaries depend only on n and workers; callers write to
/// disjoint per-index slots so results never depend on scheduling.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2 * static_cast<std::size_t>(workers)) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace erblock
