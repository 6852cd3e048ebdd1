#pragma once

#include <cstddef>
#include <functional>

namespace zerolm {

/// Worker count from ZEROLM_WORKERS, else the hardware concurrency (min 1).
unsigned default_workers();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Indices are split
/// into contiguous chunks; the first exception thrown is rethrown after all
/// workers have joined.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)> &fn);

} // namespace zerolm
