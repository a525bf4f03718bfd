#pragma once

#include <cstddef>
#include <functional>

namespace ptc {

/// Worker count: PTC_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
std::size_t default_thread_count();

/// Calls body(i) for i in [0, count) on up to `threads` workers (0 means
/// default_thread_count()). Each index runs exactly once; callers write results
/// into per-index slots so the outcome does not depend on scheduling. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace ptc
