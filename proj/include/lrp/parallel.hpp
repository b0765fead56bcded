#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace lrp {

// Replica-parallel loop: fn(i) for i in [0, count). Each replica writes its
// own slot, so results are identical for any worker count. Exceptions from
// workers are rethrown on the caller thread.
template <typename Fn>
void parallel_for(std::uint64_t count, Fn&& fn, unsigned workers = 0) {
  if (workers == 0) workers = std::thread::hardware_concurrency();
  if (workers <= 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lrp
