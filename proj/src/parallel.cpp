#include "pimd_kubo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pimd_kubo {

Parallelism Parallelism::from_environment() {
  if (const char* env = std::getenv("PIMD_KUBO_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return {static_cast<unsigned>(v)};
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return {std::max(1u, std::thread::hardware_concurrency())};
}

void parallel_for(std::size_t n_tasks, const Parallelism& par,
                  const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, par.workers), n_tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_tasks; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_tasks;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pimd_kubo
