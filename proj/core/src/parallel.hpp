#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gshape::detail {

inline unsigned resolve_workers(unsigned requested, std::size_t jobs) {
  unsigned w = requested ? requested : std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

/// Calls fn(job) for job in [0, jobs) on up to `workers` threads. The first
/// exception thrown by any job is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t jobs, unsigned workers, Fn&& fn) {
  workers = resolve_workers(workers, jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        fn(j);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace gshape::detail
