#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace prodembed {

// Runs body(i) for i in [0, count) over at most `threads` workers using a
// static contiguous split. Each index is handled by exactly one worker, so a
// body that only writes slot i produces results independent of thread count.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> failures(threads);
  workers.reserve(threads);
  const std::size_t block = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * block;
    const std::size_t end = std::min(count, begin + block);
    workers.emplace_back([&, t, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

inline std::size_t default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace prodembed
