// Index-parallel loop. Bodies write into per-index slots, so results never
// depend on the number of workers.
#pragma once

#include <cstddef>
#include <functional>

namespace conclab {

// 0 restores the default (CONCLAB_WORKERS or hardware concurrency).
void set_worker_count(unsigned workers);
unsigned worker_count();

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace conclab
