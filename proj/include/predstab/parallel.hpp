#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace predstab {

inline unsigned default_workers() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : h;
}

// Run body(i) once for each i in [0, n). Each item must write only to its
// own pre-assigned slots; with that discipline the result is independent of
// the worker count. The first exception (by item index) is rethrown.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  if (workers == 0) workers = default_workers();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::pair<std::size_t, std::exception_ptr>> errors;
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  const unsigned k = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  pool.reserve(k);
  for (unsigned t = 0; t < k; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          errors.emplace_back(i, std::current_exception());
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (!errors.empty()) {
    std::size_t first = 0;
    for (std::size_t e = 1; e < errors.size(); ++e)
      if (errors[e].first < errors[first].first) first = e;
    std::rethrow_exception(errors[first].second);
  }
}

}  // namespace predstab
