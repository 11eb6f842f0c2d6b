#pragma once

#include <cstddef>
#include <functional>

namespace imethod {

/// Worker count: hardware concurrency, capped by IMETHOD_LAB_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Each
/// index runs exactly once; the first exception thrown is rethrown here.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace imethod
