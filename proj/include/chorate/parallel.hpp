#pragma once

#include <cstddef>
#include <functional>

namespace chorate {

/// Worker count: `requested` if positive, else CHORATE_THREADS if set and
/// positive, else the hardware concurrency.
std::size_t worker_count(std::size_t requested = 0);

/// Runs body(begin, end) over fixed contiguous blocks of [0, n). Block
/// boundaries depend only on n, so any body writing to disjoint per-index slots
/// produces identical results for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t threads = 0);

} // namespace chorate
