#pragma once

#include <cstddef>
#include <functional>

namespace qlag {

/// Worker count: hardware concurrency, capped by the QLAG_THREADS environment
/// variable when it holds a positive integer.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index
/// runs exactly once; callers write results into slot i, so the merge is
/// order-independent. The first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qlag
