#pragma once

#include <cstddef>
#include <functional>

namespace fbench {

/// Worker count: hardware concurrency, capped by FORMATION_BENCH_THREADS.
std::size_t thread_count();

/// Calls body(i) for i in [0, n). Work is split into contiguous blocks, so
/// results written by index are identical for any thread count. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fbench
