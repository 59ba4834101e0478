#include "ocdl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ocdl {

namespace {
std::atomic<int> g_threads{1};
}  // namespace

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() { return g_threads.load(); }

int threads_from_env(int fallback) {
  const char* env = std::getenv("OCDL_THREADS");
  if (env == nullptr) return fallback;
  try {
    int n = std::stoi(env);
    return n >= 1 ? n : fallback;
  } catch (...) {
    return fallback;
  }
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
  if (count == 0) return;
  std::size_t workers = static_cast<std::size_t>(num_threads());
  workers = std::min(workers, (count + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    body(0, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(count, chunk));
}

}  // namespace ocdl
