#pragma once

#include <functional>

namespace npisim {

/// Effective worker count for a given request; n_threads <= 0 uses the
/// hardware concurrency, and the count never exceeds n_items.
int effective_threads(int n_threads, int n_items);

/// Runs fn(item) for item in [0, n_items) on up to n_threads workers.
/// Items are claimed from a shared atomic counter; callers must write
/// results into per-item slots so reductions stay deterministic. The
/// first exception thrown by any item is rethrown on the caller.
void parallel_for(int n_items, int n_threads, const std::function<void(int)>& fn);

/// Same, but fn also receives the worker index in [0, workers) so that
/// callers can hand each worker its own scratch state.
void parallel_for_workers(int n_items, int n_threads,
                          const std::function<void(int worker, int item)>& fn);

} // namespace npisim
