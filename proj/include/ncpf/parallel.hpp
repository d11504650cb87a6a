#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "ncpf/types.hpp"

namespace ncpf {

inline int default_thread_count() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(i) for i in [0, count). Work items must write to disjoint slots;
/// outputs are then identical for any thread count.
template <class Fn>
void parallel_for(Index count, int threads, Fn&& fn) {
  if (count <= 0) return;
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const Index chunk = (count + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const Index begin = static_cast<Index>(w) * chunk;
    const Index end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (Index i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ncpf
