#pragma once

#include <cstddef>
#include <functional>

namespace iotsentry {

/// Worker count: IOTSENTRY_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
std::size_t thread_budget();

/// Calls body(i) for every i in [0, n), spread over up to thread_budget()
/// threads in contiguous chunks. Results must be written to per-index slots;
/// the first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace iotsentry
