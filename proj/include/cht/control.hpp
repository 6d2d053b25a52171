// Space-time controls u on Omega x [0, T]: the zero control, the decaying
// source template g(x) (1+t)^{-(3+rho)}, and tabulated piecewise-constant
// slabs with box bounds for the optimizer.
#pragma once

#include <stdexcept>
#include <vector>

#include "cht/grid.hpp"

namespace cht {

class Control {
 public:
  enum class Kind { zero, decaying_source, tabulated };

  static Control zero(const Grid& g);

  // u(x,t) = g(x) * (1+t)^{-(3+rho)}, rho > 0.
  static Control decaying_source(Field g, double rho);

  // n_slabs uniform slabs over [0, t_end], all cells initialized to `value`,
  // scalar box bounds.
  static Control tabulated(const Grid& g, int n_slabs, double t_end,
                           double value, double u_min, double u_max);
  static Control tabulated(const Grid& g, int n_slabs, double t_end,
                           double value, Field u_min, Field u_max);

  Kind kind() const { return kind_; }
  const Grid& grid() const { return grid_; }
  bool is_zero() const { return kind_ == Kind::zero; }

  // Value at time t (piecewise constant in time; tabulated controls are zero
  // past t_end).
  Field sample(double t) const;
  void sample_into(double t, Field& out) const;

  // Tabulated accessors.
  int n_slabs() const { return n_slabs_; }
  double t_end() const { return t_end_; }
  double slab_length() const { return t_end_ / n_slabs_; }
  int slab_index(double t) const;
  double* slab(int s) { return values_.data() + static_cast<std::size_t>(s) * grid_.cells(); }
  const double* slab(int s) const {
    return values_.data() + static_cast<std::size_t>(s) * grid_.cells();
  }
  std::vector<double>& raw_values() { return values_; }
  const std::vector<double>& raw_values() const { return values_; }
  const Field& lower_bound() const { return u_min_; }
  const Field& upper_bound() const { return u_max_; }

  // L2(Q) norm (tabulated; zero control returns 0).
  double l2q_norm() const;

  // Exact time integral int_0^t int_Omega u dx dtau of the *continuous-time*
  // control; used for the decaying-source mass checks. For tabulated controls
  // this integrates the slab values.
  double mass_integral(double t) const;
  double mass_integral_to_infinity() const;

  double decay_rho() const { return rho_; }
  const Field& source_profile() const { return g_; }

 private:
  Kind kind_ = Kind::zero;
  Grid grid_;
  Field g_;  // decaying_source spatial profile
  double rho_ = 0.0;
  int n_slabs_ = 0;
  double t_end_ = 0.0;
  std::vector<double> values_;  // slab-major, cells per slab
  Field u_min_, u_max_;
};

// Pointwise clamp of a tabulated control to its box; idempotent and
// nonexpansive in L2(Q).
Control project_box(const Control& u);

// L2(Q) distance between two tabulated controls on the same slab layout.
double l2q_distance(const Control& a, const Control& b);

}  // namespace cht
