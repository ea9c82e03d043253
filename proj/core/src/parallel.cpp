#include "bifl/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace bifl {

int thread_count() {
  if (const char* env = std::getenv("BIFL_THREADS")) {
    const int requested = std::atoi(env);
    if (requested > 0) return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int begin, int end, const std::function<void(int, int)>& chunk_body) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::min(thread_count(), count);
  if (workers == 1) {
    chunk_body(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    pool.emplace_back([&chunk_body, lo, hi] { chunk_body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

void parallel_for_two_color(int count, const std::function<void(int)>& body) {
  for (int parity = 0; parity < 2; ++parity) {
    const int slabs = (count - parity + 1) / 2;
    parallel_for(0, slabs, [&](int lo, int hi) {
      for (int s = lo; s < hi; ++s) body(2 * s + parity);
    });
  }
}

double ordered_sum(int count, const std::function<double(int)>& partial) {
  std::vector<double> parts(static_cast<size_t>(std::max(count, 0)), 0.0);
  parallel_for(0, count, [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k) parts[static_cast<size_t>(k)] = partial(k);
  });
  double sum = 0.0;
  for (double p : parts) sum += p;
  return sum;
}

}  // namespace bifl
