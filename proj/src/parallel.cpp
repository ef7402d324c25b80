#include "raysamp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace raysamp {

int default_threads() {
  if (const char* env = std::getenv("RAYSAMP_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_chunks(std::size_t n, int chunks, int threads,
                     const std::function<void(std::size_t, std::size_t, int)>& fn) {
  chunks = std::max(chunks, 1);
  auto range = [&](int c) {
    return std::pair{n * c / chunks, n * (c + 1) / chunks};
  };
  threads = std::clamp(threads, 1, chunks);
  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) {
      const auto [b, e] = range(c);
      fn(b, e, c);
    }
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int c = next++; c < chunks; c = next++) {
          try {
            const auto [b, e] = range(c);
            fn(b, e, c);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace raysamp
