#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fixangle {

/// Worker count used by every data-parallel loop; set from --threads, never ambient.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n) over contiguous static chunks. Each index is
/// visited exactly once; callers write only to slot i, so results do not
/// depend on the worker count. The first exception thrown (lowest chunk) is
/// rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, thread_count()));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunks = std::min(workers, n);
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    pool.emplace_back([&, c] {
      const std::size_t begin = n * c / chunks;
      const std::size_t end = n * (c + 1) / chunks;
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fixangle
