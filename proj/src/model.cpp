#include "cht/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cht/spectral.hpp"

namespace cht {

Potential Potential::quartic() {
  Potential p;
  p.quartic_ = true;
  return p;
}

Potential Potential::polynomial(std::vector<double> ascending_coeffs) {
  if (ascending_coeffs.empty())
    throw std::invalid_argument("Potential: empty coefficient list");
  Potential p;
  p.quartic_ = false;
  p.coeffs_ = std::move(ascending_coeffs);
  return p;
}

PotentialValues Potential::eval(double s) const {
  if (quartic_) {
    const double w = s * s - 1.0;
    return {0.25 * w * w, s * s * s - s, 3.0 * s * s - 1.0};
  }
  // Horner evaluation of F and its first two derivatives.
  double f = 0.0, d1 = 0.0, d2 = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 0;) f = f * s + coeffs_[i];
  for (std::size_t i = coeffs_.size(); i-- > 1;)
    d1 = d1 * s + static_cast<double>(i) * coeffs_[i];
  for (std::size_t i = coeffs_.size(); i-- > 2;)
    d2 = d2 * s + static_cast<double>(i * (i - 1)) * coeffs_[i];
  return {f, d1, d2};
}

double Potential::delta(double s, double d) const {
  if (quartic_) {
    // F'(s) d + F''(s) d^2/2 + s d^3 + d^4/4, exact for the quartic
    const double d1 = s * s * s - s;
    const double d2 = 3.0 * s * s - 1.0;
    return d * (d1 + d * (0.5 * d2 + d * (s + 0.25 * d)));
  }
  return value(s + d) - value(s);
}

double Potential::kappa_default() const {
  double m = -std::numeric_limits<double>::infinity();
  const int n = 3001;
  for (int i = 0; i < n; ++i) {
    const double s = -1.5 + 3.0 * i / (n - 1);
    m = std::max(m, eval(s).d2);
  }
  return m;
}

Proliferation Proliferation::constant(double p0) {
  if (!(p0 > 0.0)) throw std::invalid_argument("Proliferation: P0 must be positive");
  Proliferation p;
  p.constant_ = true;
  p.p0_ = p0;
  return p;
}

Proliferation Proliferation::rational(double p0, double gamma, double p1) {
  if (!(p0 > 0.0)) throw std::invalid_argument("Proliferation: P0 must be positive");
  if (!(p1 > 0.0)) throw std::invalid_argument("Proliferation: P1 must be positive");
  if (gamma < 0.0) throw std::invalid_argument("Proliferation: gamma must be nonnegative");
  Proliferation p;
  p.constant_ = false;
  p.p0_ = p0;
  p.gamma_ = gamma;
  p.p1_ = p1;
  return p;
}

double Proliferation::value(double s) const {
  if (constant_) return p0_;
  return p0_ / (1.0 + gamma_ * s * s) + p1_;
}

double Proliferation::deriv(double s) const {
  if (constant_) return 0.0;
  const double d = 1.0 + gamma_ * s * s;
  return -p0_ * 2.0 * gamma_ * s / (d * d);
}

double energy_total(const ModelSpec& m, const Field& phi, const Field& sigma) {
  phi.require_same_grid(sigma);
  double pot = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    pot += m.potential.value(phi[i]);
    s2 += sigma[i] * sigma[i];
  }
  const double vol = phi.grid.cell_volume();
  return 0.5 * h1_semi_sq(phi) + pot * vol + 0.5 * s2 * vol;
}

double upsilon(const ModelSpec& m, const Field& phi, double mass) {
  double pot = 0.0;
  for (double v : phi.values) pot += m.potential.value(v);
  const double dm = mass - mean(phi);
  return 0.5 * h1_semi_sq(phi) + pot * phi.grid.cell_volume() +
         0.5 * phi.grid.measure() * dm * dm;
}

}  // namespace cht
