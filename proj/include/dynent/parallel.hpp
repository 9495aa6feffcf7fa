#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace dynent {

// Runs fn(i) for i in [0, n). Each index writes only its own output slot, so
// results are independent of the worker count and of scheduling order.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = std::min<std::size_t>(workers, n);
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
}

}  // namespace dynent
