#pragma once

#include <cstddef>
#include <functional>

namespace ordembed {

// Thread count from ORDEMBED_THREADS, else 1.
int default_threads();

// Resolves a requested count: <= 0 means default_threads().
int resolve_threads(int requested);

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items must
// write only to their own output slot; the first exception (lowest index) is
// rethrown after all workers finish.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)> &fn);

} // namespace ordembed
