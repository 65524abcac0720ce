#pragma once

// Minimal deterministic fork-join over index ranges. Work items must write to
// disjoint outputs; reductions stay sequential in the caller.

#include <functional>

namespace gclab {

/// Upper bound on worker threads. Defaults to the GCLAB_THREADS environment
/// variable when set to a positive integer, else the hardware concurrency.
int thread_limit();
void set_thread_limit(int threads);

/// Calls body(k) for every k in [begin, end), split into contiguous chunks.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace gclab
