#pragma once

// Stream-parallel map.  Each index writes only its own result slot and
// reductions happen afterwards in index order, so results are independent of
// the worker count and of scheduling.

#include <cstdint>
#include <functional>

namespace rps {

// Worker cap from RPS_THREADS; 0 or unset means hardware concurrency.
int worker_count();

// Run fn(0..n-1), possibly on several threads.  Exceptions are collected and
// the one with the lowest index is rethrown after all workers finish.
void parallel_streams(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace rps
