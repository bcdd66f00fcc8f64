#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "percospec/types.hpp"

namespace percospec {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work is claimed
/// dynamically, so callers must write results into per-index slots and reduce
/// them afterwards in index order. The first exception thrown is rethrown.
template <typename Fn>
void parallel_for(Index count, int workers, Fn&& fn) {
  const Index threads = std::clamp<Index>(workers, 1, std::max<Index>(count, 1));
  if (threads == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (Index t = 0; t < threads; ++t) pool.emplace_back(body);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace percospec
