#pragma once

#include <cstddef>
#include <functional>

namespace apd {

/// Worker count: APD_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) across up to `workers` threads. Indices are
/// split into contiguous chunks; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = worker_count());

}  // namespace apd
