// Seeded, platform-independent random number generation for initial data and
// stability probes. Distribution mapping is done by hand so that identical
// seeds give bit-identical fields regardless of the standard library.
#pragma once

#include <cstdint>

#include "cht/grid.hpp"

namespace cht {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  // splitmix64
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal via Box-Muller (one value per call, cached pair)
  double normal();

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Random combination of cosine eigenmodes with 1 <= kx+ky <= k_max (mean-free
// by construction), coefficients standard normal.
Field band_limited_noise(const Grid& g, int k_max, Rng& rng);

}  // namespace cht
