#include "cht/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace cht {

namespace {

// FFTW planning/destruction is not thread-safe; execution on distinct
// buffers is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

using GridKey = std::tuple<int, int, int, double, double>;

GridKey key_of(const Grid& g) {
  return {g.dim, g.n[0], g.n[1], g.length[0], g.length[1]};
}

double axis_eigenvalue(double h, int k, int n) {
  return (2.0 / (h * h)) * (1.0 - std::cos(M_PI * k / n));
}

}  // namespace

std::shared_ptr<const CosineBasis> CosineBasis::get(const Grid& grid) {
  static std::map<GridKey, std::shared_ptr<const CosineBasis>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto& slot = cache[key_of(grid)];
  if (!slot) slot = std::shared_ptr<const CosineBasis>(new CosineBasis(grid));
  return slot;
}

CosineBasis::CosineBasis(const Grid& grid) : grid_(grid) {
  const int nx = grid.n[0];
  const int ny = grid.dim == 2 ? grid.n[1] : 1;
  const int cells = nx * ny;
  nu_.resize(cells);
  fwd_scale_.resize(cells);
  inv_scale_.resize(cells);

  const double hx = grid.spacing(0);
  const double hy = grid.dim == 2 ? grid.spacing(1) : 1.0;

  // Orthonormal-in-L2 mode weights per axis; FFTW's REDFT10 returns
  // 2*sum f cos(...) per axis, REDFT01 expects X_0 + 2*sum X_k cos(...).
  auto axis_fwd = [](double h, int k, int n) {
    double w = (k == 0) ? std::sqrt(h / n) : std::sqrt(2.0 * h / n);
    return 0.5 * w;
  };
  auto axis_inv = [](double h, int k, int n) {
    return (k == 0) ? 1.0 / std::sqrt(h * n) : 0.5 * std::sqrt(2.0 / (h * n));
  };

  for (int ky = 0; ky < ny; ++ky) {
    for (int kx = 0; kx < nx; ++kx) {
      const int idx = ky * nx + kx;
      double nu = axis_eigenvalue(hx, kx, nx);
      if (grid.dim == 2) nu += axis_eigenvalue(hy, ky, ny);
      nu_[idx] = nu;
      double fs = axis_fwd(hx, kx, nx);
      double is = axis_inv(hx, kx, nx);
      if (grid.dim == 2) {
        fs *= axis_fwd(hy, ky, ny);
        is *= axis_inv(hy, ky, ny);
      }
      fwd_scale_[idx] = fs;
      inv_scale_[idx] = is;
    }
  }
  nu_[0] = 0.0;  // exact by construction

  std::lock_guard<std::mutex> lock(plan_mutex());
  std::vector<double> scratch_in(cells), scratch_out(cells);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  if (grid.dim == 1) {
    plan_fwd_ = fftw_plan_r2r_1d(nx, scratch_in.data(), scratch_out.data(),
                                 FFTW_REDFT10, flags);
    plan_inv_ = fftw_plan_r2r_1d(nx, scratch_in.data(), scratch_out.data(),
                                 FFTW_REDFT01, flags);
  } else {
    // Row-major storage index iy*nx+ix: FFTW's first dimension is ny.
    plan_fwd_ = fftw_plan_r2r_2d(ny, nx, scratch_in.data(), scratch_out.data(),
                                 FFTW_REDFT10, FFTW_REDFT10, flags);
    plan_inv_ = fftw_plan_r2r_2d(ny, nx, scratch_in.data(), scratch_out.data(),
                                 FFTW_REDFT01, FFTW_REDFT01, flags);
  }
  if (!plan_fwd_ || !plan_inv_) throw std::runtime_error("CosineBasis: FFTW planning failed");
}

CosineBasis::~CosineBasis() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void CosineBasis::forward(const Field& f, std::vector<double>& coeffs) const {
  if (f.grid != grid_) throw std::invalid_argument("CosineBasis: grid mismatch");
  coeffs.resize(f.values.size());
  std::vector<double> in(f.values);
  fftw_execute_r2r(static_cast<fftw_plan>(plan_fwd_), in.data(), coeffs.data());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= fwd_scale_[i];
}

void CosineBasis::inverse(const std::vector<double>& coeffs, Field& f) const {
  if (coeffs.size() != static_cast<std::size_t>(grid_.cells()))
    throw std::invalid_argument("CosineBasis: coefficient size mismatch");
  f.grid = grid_;
  f.values.resize(coeffs.size());
  std::vector<double> in(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) in[i] = coeffs[i] * inv_scale_[i];
  fftw_execute_r2r(static_cast<fftw_plan>(plan_inv_), in.data(), f.values.data());
}

Field laplacian(const Field& f) {
  const Grid& g = f.grid;
  Field out(g);
  const int nx = g.n[0];
  const double hx2 = g.spacing(0) * g.spacing(0);
  if (g.dim == 1) {
    for (int i = 0; i < nx; ++i) {
      const double fl = f.values[i > 0 ? i - 1 : 0];
      const double fr = f.values[i < nx - 1 ? i + 1 : nx - 1];
      out.values[i] = (fl - 2.0 * f.values[i] + fr) / hx2;
    }
    return out;
  }
  const int ny = g.n[1];
  const double hy2 = g.spacing(1) * g.spacing(1);
  for (int j = 0; j < ny; ++j) {
    const int jm = j > 0 ? j - 1 : 0;
    const int jp = j < ny - 1 ? j + 1 : ny - 1;
    for (int i = 0; i < nx; ++i) {
      const int im = i > 0 ? i - 1 : 0;
      const int ip = i < nx - 1 ? i + 1 : nx - 1;
      const double c = f.values[j * nx + i];
      out.values[j * nx + i] =
          (f.values[j * nx + im] - 2.0 * c + f.values[j * nx + ip]) / hx2 +
          (f.values[jm * nx + i] - 2.0 * c + f.values[jp * nx + i]) / hy2;
    }
  }
  return out;
}

Field helmholtz_solve(double a, double b, const Field& rhs) {
  if (!(a > 0.0)) throw std::invalid_argument("helmholtz_solve: a must be positive");
  if (b < 0.0) throw std::invalid_argument("helmholtz_solve: b must be nonnegative");
  auto basis = CosineBasis::get(rhs.grid);
  std::vector<double> c;
  basis->forward(rhs, c);
  const auto& nu = basis->eigenvalues();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] /= (a + b * nu[i]);
  Field x;
  basis->inverse(c, x);
  return x;
}

double h1_semi_sq(const Field& f) {
  const Grid& g = f.grid;
  const int nx = g.n[0];
  const int ny = g.dim == 2 ? g.n[1] : 1;
  const double hx = g.spacing(0);
  const double vol = g.cell_volume();
  double s = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const double d = (f.values[j * nx + i + 1] - f.values[j * nx + i]) / hx;
      s += d * d;
    }
  if (g.dim == 2) {
    const double hy = g.spacing(1);
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double d = (f.values[(j + 1) * nx + i] - f.values[j * nx + i]) / hy;
        s += d * d;
      }
  }
  return s * vol;
}

double h1_dual_norm(const Field& f) {
  auto basis = CosineBasis::get(f.grid);
  std::vector<double> c;
  basis->forward(f, c);
  const auto& nu = basis->eigenvalues();
  double s = c[0] * c[0];
  for (std::size_t i = 1; i < c.size(); ++i) s += c[i] * c[i] / nu[i];
  return std::sqrt(s);
}

FieldNorms norms(const Field& f) {
  FieldNorms n;
  double s2 = 0.0;
  for (double v : f.values) s2 += v * v;
  n.l2 = std::sqrt(s2 * f.grid.cell_volume());
  n.h1_semi = std::sqrt(h1_semi_sq(f));
  n.mean = mean(f);
  n.h1_dual = h1_dual_norm(f);
  return n;
}

double h1_norm(const Field& f) {
  double s2 = 0.0;
  for (double v : f.values) s2 += v * v;
  return std::sqrt(s2 * f.grid.cell_volume() + h1_semi_sq(f));
}

Field eigenmode(const Grid& g, int kx, int ky) {
  Field v(g);
  const int nx = g.n[0];
  const int ny = g.dim == 2 ? g.n[1] : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double val = std::cos(M_PI * kx * (i + 0.5) / nx);
      if (g.dim == 2) val *= std::cos(M_PI * ky * (j + 0.5) / ny);
      v.values[j * nx + i] = val;
    }
  return v;
}

double eigenvalue(const Grid& g, int kx, int ky) {
  double nu = axis_eigenvalue(g.spacing(0), kx, g.n[0]);
  if (g.dim == 2) nu += axis_eigenvalue(g.spacing(1), ky, g.n[1]);
  return nu;
}

}  // namespace cht
