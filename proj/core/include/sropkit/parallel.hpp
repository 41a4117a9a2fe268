#pragma once

#include <cstddef>
#include <functional>

namespace sropkit {

// Worker count: SROPKIT_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Calls body(i) for i in [0, count) across worker_count() threads. Each
// index is visited exactly once; callers write results into per-index slots
// so the outcome does not depend on scheduling. The first exception thrown
// by any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sropkit
