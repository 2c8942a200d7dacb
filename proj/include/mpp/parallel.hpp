#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace mpp {

// Run fn(i) for i in [0, items). Work is pulled from a shared counter, so the
// assignment of items to threads is nondeterministic, but results must be written
// to slots indexed by i; with that discipline output is independent of `threads`.
inline void parallel_for(int items, int threads, const std::function<void(int)>& fn) {
  if (items <= 0) return;
  if (threads < 1) threads = 1;
  if (threads == 1 || items == 1) {
    for (int i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  int workers = std::min(threads, items);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errs(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          int i = next.fetch_add(1);
          if (i >= items) break;
          fn(i);
        }
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace mpp
