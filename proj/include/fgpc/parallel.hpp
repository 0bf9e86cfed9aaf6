#pragma once

#include <cstddef>
#include <functional>

namespace fgpc {

/// Worker count: FGPC_NUM_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once and
/// bodies must only write to index-owned storage, so results do not depend
/// on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace fgpc
