#pragma once

#include <cstddef>
#include <functional>

namespace tws {

/// Worker count: TWS_THREADS if set (>= 1), else the hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Callers write
/// results into slot i and reduce afterwards, so the outcome does not depend
/// on the schedule. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tws
