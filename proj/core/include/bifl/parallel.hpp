#pragma once

#include <functional>

namespace bifl {

/// Worker count: BIFL_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [begin, end) split into contiguous chunks, one per worker.
void parallel_for(int begin, int end, const std::function<void(int, int)>& chunk_body);

/// Runs body(k) for even k in [0, count) concurrently, then odd k. Slabs of
/// equal parity never touch the same staggered entities.
void parallel_for_two_color(int count, const std::function<void(int)>& body);

/// Sums partial(k) for k in [0, count) in index order, so the result does not
/// depend on the number of workers.
double ordered_sum(int count, const std::function<double(int)>& partial);

}  // namespace bifl
