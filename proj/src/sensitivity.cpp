#include "cht/sensitivity.hpp"

#include <cmath>

#include "cht/spectral.hpp"

namespace cht {

namespace {

void require_full_base(const Trajectory& base, const SchemeParams& scheme) {
  if (!base.stores_all_levels())
    throw std::invalid_argument("linearized solve: base trajectory must store every level");
  if (std::abs(base.dt - scheme.dt) > 1e-14 * scheme.dt)
    throw std::invalid_argument("linearized solve: scheme dt differs from the base run");
}

}  // namespace

std::vector<LinearizedState> solve_linearized(const ModelSpec& m,
                                              const Trajectory& base,
                                              const Control& h,
                                              const SchemeParams& scheme) {
  scheme.validate();
  require_full_base(base, scheme);
  const Grid& grid = base.initial().phi.grid;
  if (h.grid() != grid)
    throw std::invalid_argument("solve_linearized: direction grid mismatch");

  auto basis = CosineBasis::get(grid);
  const auto& nu = basis->eigenvalues();
  const std::size_t n_cells = static_cast<std::size_t>(grid.cells());
  const double dt = scheme.dt;
  const double idt = 1.0 / dt;
  const double kap = scheme.kappa;

  std::vector<LinearizedState> out;
  out.reserve(static_cast<std::size_t>(base.steps_taken) + 1);
  LinearizedState ls;
  ls.xi = Field(grid, 0.0);
  ls.eta = Field(grid, 0.0);  // eta(0) = -Lap xi0 + F''(phi) xi0 = 0
  ls.rho = Field(grid, 0.0);
  ls.t = 0.0;
  out.push_back(ls);

  Field rlin(grid), glin(grid), h_n(grid);
  std::vector<double> xi_hat, rho_hat, r_hat, g_hat, h_hat, eta_hat(n_cells);

  for (long n = 0; n < base.steps_taken; ++n) {
    const State& bs = base.at_level(n);
    const LinearizedState& cur = out.back();
    for (std::size_t i = 0; i < n_cells; ++i) {
      const double a = m.proliferation.deriv(bs.phi[i]) * (bs.sigma[i] - bs.mu[i]);
      rlin[i] = a * cur.xi[i] +
                m.proliferation.value(bs.phi[i]) * (cur.rho[i] - cur.eta[i]);
      glin[i] = m.potential.second(bs.phi[i]) * cur.xi[i];
    }
    h.sample_into(bs.t, h_n);

    basis->forward(cur.xi, xi_hat);
    basis->forward(cur.rho, rho_hat);
    basis->forward(rlin, r_hat);
    basis->forward(glin, g_hat);
    basis->forward(h_n, h_hat);

    for (std::size_t k = 0; k < n_cells; ++k) {
      const double v = nu[k];
      const double xi_new =
          (xi_hat[k] * idt + r_hat[k] - v * g_hat[k] + kap * v * xi_hat[k]) /
          (idt + v * v + kap * v);
      eta_hat[k] = v * xi_new + g_hat[k] + kap * (xi_new - xi_hat[k]);
      rho_hat[k] = (rho_hat[k] * idt - r_hat[k] + h_hat[k]) / (idt + v);
      xi_hat[k] = xi_new;
    }

    LinearizedState next;
    next.t = base.at_level(n + 1).t;
    basis->inverse(xi_hat, next.xi);
    basis->inverse(eta_hat, next.eta);
    basis->inverse(rho_hat, next.rho);
    if (!next.xi.all_finite() || !next.rho.all_finite())
      throw NumericalFailure("linearized step produced non-finite values");
    out.push_back(std::move(next));
  }
  return out;
}

double l2q_series_distance(const std::vector<Field>& a, const std::vector<Field>& b,
                           double dt) {
  if (a.size() != b.size())
    throw std::invalid_argument("l2q_series_distance: length mismatch");
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    a[n].require_same_grid(b[n]);
    double cell = 0.0;
    for (std::size_t i = 0; i < a[n].size(); ++i) {
      const double d = a[n][i] - b[n][i];
      cell += d * d;
    }
    s += cell * a[n].grid.cell_volume() * dt;
  }
  return std::sqrt(s);
}

FrechetReport frechet_check(const ModelSpec& m, const Field& phi0,
                            const Field& sigma0, const Control& u, const Control& h,
                            const std::vector<double>& epsilons,
                            const SchemeParams& scheme) {
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0))
      throw std::invalid_argument("frechet_check: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw std::invalid_argument("frechet_check: epsilons must be strictly decreasing");
  }

  Trajectory base = run(m, phi0, sigma0, u, scheme, 1);
  auto lin = solve_linearized(m, base, h, scheme);
  const long n_levels = base.steps_taken + 1;
  const double dt = scheme.dt;

  // Tabulate u + eps h on per-step slabs.
  const Grid& grid = phi0.grid;
  const int n_slabs = static_cast<int>(base.steps_taken);
  const double t_end = base.final_state().t;
  Field u_s(grid), h_s(grid);

  FrechetReport rep;
  for (double eps : epsilons) {
    Control pert = Control::tabulated(grid, std::max(n_slabs, 1), t_end, 0.0,
                                      Field(grid, -1e300), Field(grid, 1e300));
    for (int s = 0; s < std::max(n_slabs, 1); ++s) {
      const double t = s * dt;
      u.sample_into(t, u_s);
      h.sample_into(t, h_s);
      double* slab = pert.slab(s);
      for (int i = 0; i < grid.cells(); ++i) slab[i] = u_s[i] + eps * h_s[i];
    }
    Trajectory ptraj = run(m, phi0, sigma0, pert, scheme, 1);

    double sp = 0.0, ss = 0.0;
    for (long n = 0; n < n_levels; ++n) {
      const State& b = base.at_level(n);
      const State& q = ptraj.at_level(n);
      double cp = 0.0, cs = 0.0;
      for (std::size_t i = 0; i < b.phi.size(); ++i) {
        const double dp = (q.phi[i] - b.phi[i]) / eps - lin[n].xi[i];
        const double ds = (q.sigma[i] - b.sigma[i]) / eps - lin[n].rho[i];
        cp += dp * dp;
        cs += ds * ds;
      }
      sp += cp * grid.cell_volume() * dt;
      ss += cs * grid.cell_volume() * dt;
    }
    FrechetRow row;
    row.epsilon = eps;
    row.err_phi = std::sqrt(sp);
    row.err_sigma = std::sqrt(ss);
    row.err_total = row.err_phi + row.err_sigma;
    rep.rows.push_back(row);
  }

  // Rows stop counting once the error no longer shrinks: that is the
  // resolution floor.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (rep.rows[i].err_total <= 0.0) {
      rep.rows[i].floored = true;
      continue;
    }
    if (i > 0 && !rep.rows[i - 1].floored &&
        rep.rows[i].err_total >= 0.9 * rep.rows[i - 1].err_total) {
      for (std::size_t j = i; j < rep.rows.size(); ++j) rep.rows[j].floored = true;
      break;
    }
    lx.push_back(std::log(rep.rows[i].epsilon));
    ly.push_back(std::log(rep.rows[i].err_total));
  }
  rep.n_used = static_cast<int>(lx.size());
  if (rep.n_used >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < rep.n_used; ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double det = rep.n_used * sxx - sx * sx;
    rep.slope = det != 0.0 ? (rep.n_used * sxy - sx * sy) / det : 0.0;
  }
  return rep;
}

}  // namespace cht
