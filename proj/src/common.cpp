#include "liftmatch/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace liftmatch {

int thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  int cap = hw == 0 ? 1 : int(hw);
  if (const char* env = std::getenv("LIFTMATCH_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) cap = int(std::min<long>(v, 256));
  }
  return cap;
}

void parallel_rows(int n, const std::function<void(int, int)>& fn) {
  if (n <= 0) return;
  int threads = std::min(thread_cap(), n);
  if (threads <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    int begin = t * chunk;
    int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace liftmatch
