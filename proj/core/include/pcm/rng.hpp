#pragma once

#include <cstdint>
#include <random>

namespace pcm {

// Seeded RNG wrapper. Derives doubles from raw mt19937_64 output instead of
// std::uniform_real_distribution so that streams are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // [a, b)
  double uniform(double a, double b) { return a + (b - a) * u01(); }

  // inclusive range; modulo bias is irrelevant for sampling fixtures
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool coin() { return (next_u64() & 1u) != 0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pcm
