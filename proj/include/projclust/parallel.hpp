#pragma once

#include <cstddef>
#include <functional>

namespace projclust {

/// Worker count: PROJCLUST_THREADS if set to a positive integer, otherwise
/// the hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Each
/// index runs exactly once; callers write results into slot i so the
/// output does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace projclust
