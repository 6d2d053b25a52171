#include "cht/random.hpp"

#include <cmath>

#include "cht/spectral.hpp"

namespace cht {

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform(), u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

Field band_limited_noise(const Grid& g, int k_max, Rng& rng) {
  Field f(g);
  const int ky_max = g.dim == 2 ? k_max : 0;
  for (int ky = 0; ky <= ky_max; ++ky) {
    for (int kx = 0; kx <= k_max; ++kx) {
      if (kx + ky == 0 || kx + ky > k_max) continue;
      if (kx >= g.n[0] || (g.dim == 2 && ky >= g.n[1])) continue;
      f.axpy(rng.normal(), eigenmode(g, kx, ky));
    }
  }
  return f;
}

}  // namespace cht
