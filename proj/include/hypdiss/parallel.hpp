#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hypdiss {

// Worker count from HYPDISS_THREADS (default 1).
[[nodiscard]] inline int thread_count() {
  if (const char* env = std::getenv("HYPDISS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// Calls fn(i) for i in [0, count). Each index is written by exactly one worker, so
// callers that store results by index get thread-count independent output.
template <class Fn>
void parallel_for(int count, Fn&& fn) {
  const int workers = std::min(thread_count(), std::max(count, 1));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hypdiss
