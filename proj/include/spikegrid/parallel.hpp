#pragma once

#include <functional>

namespace spikegrid {

// Worker budget: SPIKEGRID_THREADS caps std::thread::hardware_concurrency();
// jobs_cap > 0 lowers it further.
int worker_count(int jobs_cap = 0);

// Runs fn(0..n-1) across workers. Work items must not depend on each other;
// callers that need determinism reduce results by index afterwards.
void parallel_for(int n, int jobs_cap, const std::function<void(int)>& fn);

}  // namespace spikegrid
