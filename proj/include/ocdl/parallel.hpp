#pragma once

#include <cstddef>
#include <functional>

namespace ocdl {

/// Caps the number of worker threads used by inner data-parallel loops.
/// Values < 1 are clamped to 1. Results never depend on this setting:
/// every parallel loop writes disjoint outputs and reductions stay serial.
void set_num_threads(int n);
int num_threads();

/// Reads OCDL_THREADS; returns `fallback` when unset or unparsable.
int threads_from_env(int fallback = 1);

/// Runs body(begin, end) over contiguous chunks of [0, count).
/// Chunks never hold fewer than `min_chunk` items.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 256);

}  // namespace ocdl
