#pragma once

#include <cstdint>
#include <functional>

namespace speckle {

// Worker count for data-parallel helpers: SPECKLE_THREADS env var, else
// hardware concurrency. Value 1 disables threading.
int worker_count();

// Runs fn(begin, end) over [0, n) in contiguous chunks, possibly on a shared
// thread pool. Chunks are disjoint, so writes to per-index slots are race
// free and results do not depend on scheduling. Nested calls run inline on
// the calling thread. Blocks until all chunks finish.
void parallel_for(int64_t n, int64_t grain, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace speckle
