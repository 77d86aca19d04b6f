#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace rcon {

inline int default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs body(i) for i in [0, count) on up to `workers` threads. Every index
/// runs exactly once, so results written to slot i do not depend on the
/// schedule. Exceptions are caught per index and returned, one per index
/// (null when body(i) succeeded).
template <class Body>
std::vector<std::exception_ptr> parallel_for(int count, int workers, Body&& body) {
  std::vector<std::exception_ptr> errors(std::max(0, count));
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(1, count));
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  return errors;
}

}  // namespace rcon
