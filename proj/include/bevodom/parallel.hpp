#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bevodom {

/// Execution knobs shared by the tensor kernels. Work is split over
/// independent output slices only, so every thread count produces
/// bit-identical results; `threads <= 1` runs inline in index order.
struct ExecutionOptions {
  unsigned threads = 1;
};

/// Calls fn(i) for i in [0, n), partitioned into contiguous blocks.
template <typename Fn>
void parallel_for(std::size_t n, const ExecutionOptions& exec, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, exec.threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace bevodom
