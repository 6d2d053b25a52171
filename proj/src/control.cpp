#include "cht/control.hpp"

#include <algorithm>
#include <cmath>

namespace cht {

Control Control::zero(const Grid& g) {
  Control c;
  c.kind_ = Kind::zero;
  c.grid_ = g;
  return c;
}

Control Control::decaying_source(Field g, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("Control: rho must be positive");
  if (!g.all_finite()) throw std::invalid_argument("Control: profile must be finite");
  Control c;
  c.kind_ = Kind::decaying_source;
  c.grid_ = g.grid;
  c.g_ = std::move(g);
  c.rho_ = rho;
  return c;
}

Control Control::tabulated(const Grid& g, int n_slabs, double t_end, double value,
                           double u_min, double u_max) {
  return tabulated(g, n_slabs, t_end, value, Field(g, u_min), Field(g, u_max));
}

Control Control::tabulated(const Grid& g, int n_slabs, double t_end, double value,
                           Field u_min, Field u_max) {
  if (n_slabs < 1) throw std::invalid_argument("Control: n_slabs must be positive");
  if (!(t_end > 0.0)) throw std::invalid_argument("Control: t_end must be positive");
  if (u_min.grid != g || u_max.grid != g)
    throw std::invalid_argument("Control: bound grid mismatch");
  for (std::size_t i = 0; i < u_min.size(); ++i)
    if (!(u_min[i] <= u_max[i]))
      throw std::invalid_argument("Control: requires u_min <= u_max everywhere");
  Control c;
  c.kind_ = Kind::tabulated;
  c.grid_ = g;
  c.n_slabs_ = n_slabs;
  c.t_end_ = t_end;
  c.values_.assign(static_cast<std::size_t>(n_slabs) * g.cells(), value);
  c.u_min_ = std::move(u_min);
  c.u_max_ = std::move(u_max);
  return c;
}

int Control::slab_index(double t) const {
  const double x = t * n_slabs_ / t_end_ + 1e-9;
  return std::clamp(static_cast<int>(std::floor(x)), 0, n_slabs_ - 1);
}

void Control::sample_into(double t, Field& out) const {
  out.grid = grid_;
  out.values.resize(static_cast<std::size_t>(grid_.cells()));
  switch (kind_) {
    case Kind::zero:
      std::fill(out.values.begin(), out.values.end(), 0.0);
      return;
    case Kind::decaying_source: {
      const double w = std::pow(1.0 + t, -(3.0 + rho_));
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * g_[i];
      return;
    }
    case Kind::tabulated: {
      if (t >= t_end_) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return;
      }
      const double* s = slab(slab_index(t));
      std::copy(s, s + grid_.cells(), out.values.begin());
      return;
    }
  }
}

Field Control::sample(double t) const {
  Field f(grid_);
  sample_into(t, f);
  return f;
}

double Control::l2q_norm() const {
  if (kind_ != Kind::tabulated) {
    if (kind_ == Kind::zero) return 0.0;
    throw std::invalid_argument("Control: L2(Q) norm is defined for tabulated controls");
  }
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s * grid_.cell_volume() * slab_length());
}

double Control::mass_integral(double t) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::decaying_source: {
      // int_0^t (1+s)^{-(3+rho)} ds = (1 - (1+t)^{-(2+rho)}) / (2+rho)
      const double a = 2.0 + rho_;
      return integrate(g_) * (1.0 - std::pow(1.0 + t, -a)) / a;
    }
    case Kind::tabulated: {
      double s = 0.0;
      const double len = slab_length();
      for (int k = 0; k < n_slabs_; ++k) {
        const double lo = k * len, hi = (k + 1) * len;
        if (t <= lo) break;
        double cell_sum = 0.0;
        const double* v = slab(k);
        for (int i = 0; i < grid_.cells(); ++i) cell_sum += v[i];
        s += cell_sum * grid_.cell_volume() * (std::min(t, hi) - lo);
      }
      return s;
    }
  }
  return 0.0;
}

double Control::mass_integral_to_infinity() const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::decaying_source:
      return integrate(g_) / (2.0 + rho_);
    case Kind::tabulated:
      return mass_integral(t_end_);
  }
  return 0.0;
}

Control project_box(const Control& u) {
  if (u.kind() != Control::Kind::tabulated)
    throw std::invalid_argument("project_box: requires a tabulated control");
  Control out = u;
  const int cells = u.grid().cells();
  for (int s = 0; s < u.n_slabs(); ++s) {
    double* v = out.slab(s);
    for (int i = 0; i < cells; ++i)
      v[i] = std::clamp(v[i], u.lower_bound()[i], u.upper_bound()[i]);
  }
  return out;
}

double l2q_distance(const Control& a, const Control& b) {
  if (a.kind() != Control::Kind::tabulated || b.kind() != Control::Kind::tabulated)
    throw std::invalid_argument("l2q_distance: requires tabulated controls");
  if (a.grid() != b.grid() || a.n_slabs() != b.n_slabs() || a.t_end() != b.t_end())
    throw std::invalid_argument("l2q_distance: layout mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.raw_values().size(); ++i) {
    const double d = a.raw_values()[i] - b.raw_values()[i];
    s += d * d;
  }
  return std::sqrt(s * a.grid().cell_volume() * a.slab_length());
}

}  // namespace cht
