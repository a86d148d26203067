#pragma once

/* Seedable, splittable random streams.
 *
 * Every randomized routine in the library derives its draws from an
 * RngStream keyed by (seed, stream indices).  Replication r of a Monte
 * Carlo run always uses the stream (seed, ..., r), so results are
 * bit-identical no matter how replications are scheduled across threads.
 * Exponential and normal deviates are generated by explicit inverse
 * transform / Marsaglia polar so the byte-for-byte output contract does
 * not depend on standard-library distribution internals.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace tptest {

// SplitMix64 finalizer; good avalanche, cheap, and stateless.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix64(seed, 0)) {}
  RngStream(std::uint64_t seed, std::uint64_t k1) : engine_(mix64(seed, k1)) {}
  RngStream(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2)
      : engine_(mix64(mix64(seed, k1), k2)) {}
  RngStream(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3)
      : engine_(mix64(mix64(mix64(seed, k1), k2), k3)) {}

  // Uniform on [0, 1).
  double uniform01() {
    return (engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_pos() {
    return 1.0 - uniform01();
  }

  // Inverse-transform exponential; rate <= 0 degenerates to "never".
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform_pos()) / rate;
  }

  // Standard normal via Marsaglia polar, caching the spare deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tptest
