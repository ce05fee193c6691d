#ifndef MSD_PARALLEL_HPP
#define MSD_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace msd {

// Evaluates fn(i) for i in [0, n) on up to `jobs` threads. Results land at
// their index, so the output does not depend on completion order. The first
// exception thrown by any task is rethrown after all workers stop.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(int n, int jobs, Fn fn) {
  std::vector<Result> results(n);
  if (n == 0) return results;
  jobs = std::clamp(jobs, 1, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          results[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace msd

#endif  // MSD_PARALLEL_HPP
