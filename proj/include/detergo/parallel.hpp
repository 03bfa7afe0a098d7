#pragma once

#include <cstddef>
#include <functional>

namespace detergo {

/// Worker count used by the data-parallel loops. Initialized from the
/// DETERGO_THREADS environment variable (default: hardware concurrency).
int thread_count();
void set_thread_count(int n);

/// Runs body(begin, end) over a static partition of [0, n). Chunk boundaries
/// depend only on n and the chunk count, never on scheduling.
void parallel_chunks(std::size_t n, std::size_t chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Runs body(i) for every i in [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace detergo
