#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace codim {

/// Caps the number of worker threads used by parallel loops (0 = hardware).
void set_max_threads(unsigned threads);
unsigned max_threads();

/// Runs body(chunk_begin, chunk_end) over [0, count) split into fixed chunks of
/// `chunk` items. Chunk boundaries never depend on the thread count.
void parallel_for(size_t count, size_t chunk, const std::function<void(size_t, size_t)>& body);

/// Deterministic sum: partial sums are formed per fixed chunk and combined in
/// chunk order, so the result is bit-identical for any thread count.
double parallel_sum(size_t count, size_t chunk, const std::function<double(size_t, size_t)>& partial);

}  // namespace codim
