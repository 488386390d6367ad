// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>

namespace plapdg {

/// Worker cap: PLAPDG_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
int worker_count();

/// Splits [0, n) into at most `workers` contiguous chunks and runs
/// body(begin, end, chunk_index) on each, one thread per chunk. Chunk
/// boundaries depend only on n and the worker count. The first exception
/// thrown by any chunk is rethrown after all threads join.
void parallel_for(std::int64_t n, int workers,
                  const std::function<void(std::int64_t, std::int64_t, int)>& body);

/// splitmix64 finalizer; used to derive independent per-sample seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace plapdg
