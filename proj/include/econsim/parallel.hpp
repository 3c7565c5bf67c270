#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace econsim {

/// Runs fn(begin, end) over [0, count) split into contiguous chunks.
///
/// Work is only split when there is at least `grain` items per worker, so
/// small populations stay on the calling thread. Callers must write results
/// into per-index slots; any reduction happens afterwards, serially and in
/// index order, which keeps results independent of the thread count.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, std::size_t grain, Fn&& fn) {
  grain = std::max<std::size_t>(grain, 1);
  std::size_t workers = std::min<std::size_t>(threads, count / grain);
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    auto run = [&](std::size_t begin, std::size_t end) {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    };
    for (std::size_t w = 1; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
    run(0, std::min(count, chunk));
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace econsim
