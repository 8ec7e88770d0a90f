#pragma once

#include <cstddef>
#include <functional>

namespace qkp {

// Process-wide cap on worker threads used by parallel_for. 0 means "use the
// hardware concurrency".
void set_max_threads(unsigned threads);
unsigned max_threads();

// Runs body(i) for i in [0, count). Iterations must be independent; results
// are written by index so the outcome does not depend on the thread count.
// The first exception thrown by any iteration is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace qkp
