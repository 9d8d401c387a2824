// Deterministic random number helpers.  All randomness in the lab flows
// through these so that a (master_seed, trial_index) pair reproduces the
// same stream on any platform and under any thread count.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rmp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trial seed derivation: independent of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x51ed2701a9e3fb1dULL));
}

// Thin wrapper around mt19937_64.  Distribution code is written out by hand
// because std::*_distribution is not bit-stable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(bits() >> 11) * 0x1.0p-53;
  }

  // uniform in [lo,hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in {0,...,n-1}
  std::uint64_t index(std::uint64_t n) {
    // rejection sampling keeps the draw exactly uniform
    const std::uint64_t lim = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
      v = bits();
    } while (v >= lim);
    return v % n;
  }

  // standard normal via Box-Muller; caches the second variate
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rmp
