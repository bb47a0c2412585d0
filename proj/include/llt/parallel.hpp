#pragma once

#include <cstddef>
#include <functional>

namespace llt {

/// Worker count used by internally parallel stages (forest fitting, batch prediction).
/// 0 means one worker per hardware thread.
void set_worker_count(std::size_t n);
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers write
/// results into per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace llt
