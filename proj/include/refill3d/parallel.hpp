#pragma once

#include <functional>

namespace refill3d::par {

// Worker count: the REFILL3D_THREADS environment variable when set (1..64),
// otherwise hardware concurrency. Always at least 1.
int thread_budget();

// Runs row_fn(y) for y in [0, rows). Rows are split into contiguous chunks,
// one per worker. Callers keep results thread-count-invariant by writing to
// disjoint per-row slots and reducing them afterwards in row order; nothing
// here performs a reduction.
void for_rows(int rows, const std::function<void(int)>& row_fn);

}  // namespace refill3d::par
