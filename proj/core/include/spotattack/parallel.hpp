#pragma once

#include <cstddef>
#include <functional>

namespace spotattack {

/// Number of hardware threads, at least 1.
int default_workers();

/// Calls `task(i)` for every i in [0, count) on up to `workers` threads.
/// The first exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

}  // namespace spotattack
