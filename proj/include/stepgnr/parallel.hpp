#ifndef STEPGNR_PARALLEL_HPP
#define STEPGNR_PARALLEL_HPP

#include <exception>
#include <functional>

namespace stepgnr {

/// 0 maps to the hardware concurrency (at least 1).
int resolve_threads(int requested);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write into preallocated slots so results do
/// not depend on scheduling. The first exception thrown by any body is
/// rethrown after all workers have joined.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace stepgnr

#endif
