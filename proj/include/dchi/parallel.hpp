#ifndef DCHI_PARALLEL_HPP
#define DCHI_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace dchi {

// Runs fn(begin, end) over a contiguous partition of [0, count) on up to
// `workers` threads. Each task index lands in exactly one chunk, so callers
// that write task i's result to slot i are schedule-independent by
// construction. The first exception thrown by any worker is rethrown.
inline void parallel_chunks(std::size_t count, std::size_t workers,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (workers == 0) workers = 1;
  workers = std::min(workers, count);
  if (workers == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
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

}  // namespace dchi

#endif  // DCHI_PARALLEL_HPP
