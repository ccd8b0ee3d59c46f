#pragma once

#include <cstdint>
#include <random>

namespace qforge {

// splitmix64 step; used to derive independent stream seeds from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random source.  All draws are defined directly on the raw
// mt19937_64 output so that results are identical across standard library
// implementations (std::uniform_*_distribution is not pinned down by the
// standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Independent stream for (seed, index): used for per-trajectory streams so
  // results do not depend on how trajectories are scheduled over workers.
  static Rng derive(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(seed ^ splitmix64(index + 1)));
  }

  std::uint64_t next() { return eng_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [0, hi).
  double uniform(double hi) { return uniform() * hi; }

  // Uniform integer in [0, k).  Plain modulo draw; the bias for k far below
  // 2^64 is negligible and the result is implementation independent.
  std::uint64_t below(std::uint64_t k) { return next() % k; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qforge
