#pragma once

#include <cstdint>
#include <random>

namespace gin {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from (seed, index); used for per-record
// and per-tree sub-seeds so results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Deterministic random source. The floating-point conversions are written out
// here rather than taken from <random> distributions, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Unbiased integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  double normal();
  double gamma_int(int shape);
  double beta_int(int a, int b);

  Rng split(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace gin
