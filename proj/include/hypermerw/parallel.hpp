#pragma once

#include <cstddef>
#include <functional>

namespace hypermerw {

/// Worker count: HYPERMERW_THREADS if set and positive, else the hardware
/// concurrency (0 in the variable also means hardware concurrency).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over thread_count() workers using fixed
/// contiguous chunks. body must only write to per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hypermerw
