// Uniform cell-centered grids and scalar fields on them.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cht {

// Rectangle (or interval) with homogeneous Neumann boundaries, discretized
// by cell-centered finite differences: centers x_j = (j + 1/2) h.
struct Grid {
  int dim = 1;
  std::array<int, 2> n{1, 1};          // cells per axis; n[1] == 1 in 1D
  std::array<double, 2> length{1, 1};  // domain lengths; length[1] == 1 in 1D

  static Grid line(int n_cells, double len) {
    if (n_cells < 1) throw std::invalid_argument("Grid: n_cells must be positive");
    if (!(len > 0.0)) throw std::invalid_argument("Grid: length must be positive");
    Grid g;
    g.dim = 1;
    g.n = {n_cells, 1};
    g.length = {len, 1.0};
    return g;
  }

  static Grid rect(int nx, int ny, double lx, double ly) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("Grid: n_cells must be positive");
    if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("Grid: length must be positive");
    Grid g;
    g.dim = 2;
    g.n = {nx, ny};
    g.length = {lx, ly};
    return g;
  }

  int cells() const { return n[0] * n[1]; }
  double spacing(int axis) const { return length[axis] / n[axis]; }
  double cell_volume() const {
    return dim == 1 ? spacing(0) : spacing(0) * spacing(1);
  }
  double measure() const { return dim == 1 ? length[0] : length[0] * length[1]; }
  double center(int axis, int index) const { return (index + 0.5) * spacing(axis); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim == b.dim && a.n == b.n && a.length == b.length;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }
};

// Scalar field sampled at cell centers, row-major (x fastest in 2D storage
// convention: index = iy * nx + ix).
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0)
      : grid(g), values(static_cast<std::size_t>(g.cells()), fill) {}

  static Field constant(const Grid& g, double v) { return Field(g, v); }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Field& operator+=(const Field& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  Field& operator*=(double s) {
    for (double& v : values) v *= s;
    return *this;
  }
  // this += a * o
  Field& axpy(double a, const Field& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += a * o.values[i];
    return *this;
  }

  void require_same_grid(const Field& o) const {
    if (grid != o.grid) throw std::invalid_argument("Field: grid mismatch");
  }
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

// Midpoint quadrature; exact for cell-wise-constant integrands.
inline double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

inline double mean(const Field& f) { return integrate(f) / f.grid.measure(); }

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.cell_volume());
}

// L2 inner product with the cell-volume weight.
inline double inner(const Field& a, const Field& b) {
  a.require_same_grid(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s * a.grid.cell_volume();
}

}  // namespace cht
