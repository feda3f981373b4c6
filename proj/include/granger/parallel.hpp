#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace granger {

/// Static block partition of [0, count) across worker threads. Work items
/// must be independent; exceptions from workers are rethrown on the caller.
/// n_threads <= 0 picks the hardware concurrency.
inline void parallel_for(int count, int n_threads,
                         const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (n_threads <= 0) {
    n_threads = int(std::max(1u, std::thread::hardware_concurrency()));
  }
  n_threads = std::min(n_threads, count);
  if (n_threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    const int lo = int(std::int64_t(count) * w / n_threads);
    const int hi = int(std::int64_t(count) * (w + 1) / n_threads);
    workers.emplace_back([&, lo, hi, w] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace granger
