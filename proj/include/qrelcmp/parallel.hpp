#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qrelcmp {

/// Splits [0, total) into at most `workers` contiguous chunks and runs
/// `fn(begin, end, chunk_index)` for each, one thread per chunk. The first
/// exception thrown by any chunk is rethrown after all threads join.
template <class Fn>
void parallel_chunks(std::size_t total, unsigned workers, Fn&& fn) {
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(workers == 0 ? 1 : workers, total));
  if (chunks == 1) {
    fn(std::size_t{0}, total, std::size_t{0});
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = total * c / chunks;
    const std::size_t end = total * (c + 1) / chunks;
    threads.emplace_back([&, begin, end, c] {
      try {
        fn(begin, end, c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qrelcmp
