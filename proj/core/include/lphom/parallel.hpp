#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace lphom {

/// Global worker cap used by parallel_for / parallel_reduce (CLI --threads).
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0,n). Work is handed out in fixed-size chunks;
/// outputs must be disjoint per index. Chunk boundaries do not depend on the
/// worker count, so any deterministic per-index computation stays
/// reproducible under any --threads value.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

/// Sum of fn(i) over [0,n). Each fixed 4096-wide chunk is summed
/// sequentially, then the chunk partials are combined by pairwise summation
/// in chunk order. Bit-reproducible for any worker count.
double parallel_reduce(std::int64_t n, const std::function<double(std::int64_t)>& fn);

/// Pairwise (cascade) summation in index order.
double pairwise_sum(std::span<const double> v);

/// Deterministic uniform RNG: std::mt19937_64 stream with a fixed
/// bits-to-double mapping (implementation-defined distributions avoided).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lphom
