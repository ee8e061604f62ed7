#pragma once

#include <cstddef>
#include <functional>

namespace pimd_kubo {

// Worker count for ensemble and trajectory loops. Results never depend on it.
struct Parallelism {
  unsigned workers = 1;

  // PIMD_KUBO_THREADS if set and positive, else hardware concurrency.
  static Parallelism from_environment();
};

// Runs task(i) for i in [0, n_tasks) on up to par.workers threads. Tasks must
// write only to task-owned storage. The first exception thrown by any task is
// rethrown after all workers have joined.
void parallel_for(std::size_t n_tasks, const Parallelism& par,
                  const std::function<void(std::size_t)>& task);

}  // namespace pimd_kubo
