#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dartskill {

// splitmix64 finalizer: a cheap, well-mixed 64-bit hash used to derive
// stream seeds from a master seed plus a path of indices.  Keeping the
// derivation explicit (instead of reusing one engine everywhere) makes every
// rollout reproducible in isolation from its (master, update, rollout) path.
inline std::uint64_t mix_u64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix_u64(master);
  for (std::uint64_t p : path) s = mix_u64(s ^ mix_u64(p));
  return s;
}

// Deterministic random source.  mt19937_64 is fully specified by the
// standard, but normal_distribution / uniform_real_distribution are not
// (their algorithms are implementation-defined), so the draws are done by
// hand: a 53-bit uniform and a Box-Muller transform.  Two runs with the
// same seed produce bit-identical streams on any conforming compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller.  Discards the paired variate so the
  // draw count per sample is fixed and the stream stays aligned across
  // code paths.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard the log: uniform01 can return exactly 0.
    while (u1 <= 0.0) u1 = uniform01();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dartskill
