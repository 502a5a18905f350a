#pragma once

#include <cstddef>
#include <functional>

namespace qnls {

// Worker count: explicit override if set (> 0), else QNLS_THREADS, else hardware
// concurrency; QNLS_THREADS always caps the result.
int thread_budget();
void set_thread_override(int threads);

// Runs body(i) for i in [0, count); results must be written to per-index slots so
// the merge order is deterministic.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace qnls
