#pragma once

#include <cstddef>
#include <functional>

namespace fracspec {

/// Worker count for embarrassingly parallel sweeps: FRACSPEC_THREADS when set
/// to a positive integer, otherwise the hardware concurrency.
unsigned thread_count();

/// Calls body(i) for i in [0, n) on up to thread_count() threads. Each index
/// is handled by exactly one call, so writing to slot i is race free and the
/// result does not depend on the schedule. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fracspec
