#include "refill3d/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace refill3d::par {

int thread_budget() {
  if (const char* env = std::getenv("REFILL3D_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) return std::min(requested, 64);
  }
  const int n = static_cast<int>(std::thread::hardware_concurrency());
  return n < 1 ? 1 : n;
}

void for_rows(int rows, const std::function<void(int)>& row_fn) {
  if (rows <= 0) return;
  const int workers = std::min(thread_budget(), rows);
  if (workers == 1) {
    for (int y = 0; y < rows; ++y) row_fn(y);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const int chunk = (rows + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (int y = begin; y < end; ++y) row_fn(y);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace refill3d::par
