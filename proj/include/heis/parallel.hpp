#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace heis::parallel {

// Cap on worker threads used by data-parallel loops (>= 1). Results never
// depend on this value: work is split into chunks whose boundaries depend
// only on the problem size.
void set_max_threads(int threads);
int max_threads();

// Calls body(chunk_index, begin, end) for consecutive chunks of
// [0, count) of length `chunk` (the last may be shorter). Chunks may run
// concurrently; body must only write to chunk-private state.
void for_chunks(std::size_t count, std::size_t chunk,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t count, std::size_t chunk) {
  return chunk == 0 ? 0 : (count + chunk - 1) / chunk;
}

// Pairwise (cascade) summation; the association order is fixed by the
// length of the input alone.
double pairwise_sum(std::span<const double> values);

// Sum of f(i) over [0, count) evaluated in parallel, reduced
// deterministically via per-chunk partial sums and pairwise_sum.
double deterministic_sum(std::size_t count, const std::function<double(std::size_t)>& f,
                         std::size_t chunk = 256);

}  // namespace heis::parallel
