#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oscillab {

// Worker cap shared by every parallel loop in the library. Zero means hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Each index is handled exactly once, so results written
// per index do not depend on the number of workers.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const int workers = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(thread_count())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto run = [&] {
    try {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    } catch (...) {
      std::lock_guard lk(failure_lock);
      if (!failure) failure = std::current_exception();
      next = n;
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace oscillab
