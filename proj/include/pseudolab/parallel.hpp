#pragma once

#include <cstddef>
#include <functional>

namespace pseudolab {

/// Number of worker threads: PSEUDOLAB_THREADS env var, 0 or unset = hardware auto.
unsigned worker_count();

/// Runs fn(i) for i in [0, n). Work items must be independent; results keyed by
/// index stay deterministic regardless of the thread count. Falls back to a
/// plain loop when a single worker is requested or n is small.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pseudolab
