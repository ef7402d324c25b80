#pragma once

#include <cstddef>
#include <functional>

namespace raysamp {

/// Worker count from RAYSAMP_THREADS when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
int default_threads();

/// Splits [0, n) into `chunks` contiguous ranges and runs fn(begin, end, chunk) for each,
/// using up to `threads` OS threads. Chunk boundaries depend only on n and `chunks`.
void parallel_chunks(std::size_t n, int chunks, int threads,
                     const std::function<void(std::size_t, std::size_t, int)>& fn);

}  // namespace raysamp
