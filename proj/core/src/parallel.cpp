#include "lphom/parallel.hpp"

#include <algorithm>

namespace lphom {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = hardware concurrency
constexpr std::int64_t kChunk = 4096;

int effective_threads(std::int64_t n) {
  int cap = g_max_threads.load();
  if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap <= 0) cap = 1;
  std::int64_t chunks = (n + kChunk - 1) / kChunk;
  return static_cast<int>(std::min<std::int64_t>(cap, std::max<std::int64_t>(chunks, 1)));
}
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n); }

int max_threads() {
  int cap = g_max_threads.load();
  if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
  return cap > 0 ? cap : 1;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  int workers = effective_threads(n);
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto body = [&] {
    for (;;) {
      std::int64_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      std::int64_t end = std::min(begin + kChunk, n);
      for (std::int64_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 0; t < workers - 1; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

double parallel_reduce(std::int64_t n, const std::function<double(std::int64_t)>& fn) {
  if (n <= 0) return 0.0;
  std::int64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  parallel_for(chunks, [&](std::int64_t c) {
    std::int64_t begin = c * kChunk;
    std::int64_t end = std::min(begin + kChunk, n);
    double s = 0.0;
    for (std::int64_t i = begin; i < end; ++i) s += fn(i);
    partial[static_cast<std::size_t>(c)] = s;
  });
  return pairwise_sum(partial);
}

}  // namespace lphom
