// Double-well potential F, proliferation function P, and the energy
// functionals built from them.
#pragma once

#include <vector>

#include "cht/grid.hpp"

namespace cht {

struct PotentialValues {
  double f;   // F(s)
  double d1;  // F'(s)
  double d2;  // F''(s)
};

// F with the default quartic (s^2-1)^2/4, or a user polynomial in ascending
// coefficients. Growth/analyticity assumptions are validated only for the
// built-in quartic; polynomials carry assumptions_validated() == false and
// callers decide whether to warn.
class Potential {
 public:
  static Potential quartic();
  static Potential polynomial(std::vector<double> ascending_coeffs);

  PotentialValues eval(double s) const;
  double value(double s) const { return eval(s).f; }
  double deriv(double s) const { return eval(s).d1; }
  double second(double s) const { return eval(s).d2; }

  // F(s + d) - F(s) without large-term cancellation (exact Taylor for the
  // quartic; direct difference for user polynomials).
  double delta(double s, double d) const;

  // max F'' over [-1.5, 1.5]; the default stabilization constant.
  double kappa_default() const;

  bool assumptions_validated() const { return quartic_; }

 private:
  bool quartic_ = true;
  std::vector<double> coeffs_;
};

// P, strictly positive: constant P0, or the rational form P0/(1+gamma s^2)+P1.
class Proliferation {
 public:
  static Proliferation constant(double p0);
  static Proliferation rational(double p0, double gamma, double p1);

  double value(double s) const;
  double deriv(double s) const;
  bool is_constant() const { return constant_; }

 private:
  bool constant_ = true;
  double p0_ = 0.5, gamma_ = 0.0, p1_ = 0.0;
};

struct ModelSpec {
  Potential potential = Potential::quartic();
  Proliferation proliferation = Proliferation::constant(0.5);
};

// E(phi, sigma) = int(|grad phi|^2/2 + F(phi)) + |sigma|_L2^2 / 2
double energy_total(const ModelSpec& m, const Field& phi, const Field& sigma);

// Upsilon(phi) = int(|grad phi|^2/2 + F(phi)) + |Omega| (m - mean phi)^2 / 2
double upsilon(const ModelSpec& m, const Field& phi, double mass);

}  // namespace cht
