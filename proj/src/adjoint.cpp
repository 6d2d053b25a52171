#include "cht/adjoint.hpp"

#include <cmath>

#include "cht/spectral.hpp"

namespace cht {

long tau_level(const Trajectory& base, double tau) {
  const double dt = base.dt;
  const long level = std::lround(tau / dt);
  if (std::abs(tau - level * dt) > 1e-9 * std::max(1.0, tau))
    throw std::invalid_argument("tau is not a node of the time grid");
  if (level < 0 || level > base.steps_taken)
    throw std::invalid_argument("tau lies outside the stored trajectory");
  return level;
}

std::vector<AdjointState> solve_adjoint(const ModelSpec& m, const Trajectory& base,
                                        const CostSpec& cost, double tau) {
  if (!base.stores_all_levels())
    throw std::invalid_argument("solve_adjoint: base trajectory must store every level");
  const long M = tau_level(base, tau);
  const Grid& grid = base.initial().phi.grid;
  cost.validate_targets(grid);

  auto basis = CosineBasis::get(grid);
  const auto& nu = basis->eigenvalues();
  const std::size_t n_cells = static_cast<std::size_t>(grid.cells());
  const double dt = base.dt;
  const double idt = 1.0 / dt;

  auto reconstruct_q = [&](const State& bs, const Field& p, const Field& r) {
    Field q = laplacian(p);
    for (std::size_t i = 0; i < n_cells; ++i)
      q[i] -= m.proliferation.value(bs.phi[i]) * (p[i] - r[i]);
    return q;
  };

  std::vector<AdjointState> series(static_cast<std::size_t>(M) + 1);

  // Terminal data at tau.
  {
    const State& bs = base.at_level(M);
    AdjointState& a = series[static_cast<std::size_t>(M)];
    a.t = bs.t;
    a.p = Field(grid, 0.5 * cost.beta_S);
    if (cost.beta_Omega > 0)
      for (std::size_t i = 0; i < n_cells; ++i)
        a.p[i] += cost.beta_Omega * (bs.phi[i] - cost.phi_Omega[i]);
    a.r = Field(grid, 0.0);
    a.q = reconstruct_q(bs, a.p, a.r);
  }

  Field src_r(grid);
  std::vector<double> p_hat, r_hat, sp_hat, sr_hat;

  for (long n = M - 1; n >= 0; --n) {
    const AdjointState& up = series[static_cast<std::size_t>(n + 1)];
    const State& bs = base.at_level(n + 1);

    // Explicit couplings at the already-computed level n+1.
    Field pw(grid);
    for (std::size_t i = 0; i < n_cells; ++i)
      pw[i] = m.proliferation.value(bs.phi[i]) * (up.p[i] - up.r[i]);
    Field s_p = laplacian(pw);
    for (std::size_t i = 0; i < n_cells; ++i) {
      const double a_coef =
          m.proliferation.deriv(bs.phi[i]) * (bs.sigma[i] - bs.mu[i]);
      s_p[i] += m.potential.second(bs.phi[i]) * up.q[i] -
                a_coef * (up.r[i] - up.p[i]);
      src_r[i] = pw[i];  // -P (r - p) = +P (p - r)
    }
    if (cost.beta_Q > 0) {
      const Field& target = cost.phi_Q.at(n + 1);
      for (std::size_t i = 0; i < n_cells; ++i)
        s_p[i] += cost.beta_Q * (bs.phi[i] - target[i]);
    }
    if (cost.alpha_Q > 0) {
      const Field& target = cost.sigma_Q.at(n + 1);
      for (std::size_t i = 0; i < n_cells; ++i)
        src_r[i] += cost.alpha_Q * (bs.sigma[i] - target[i]);
    }

    basis->forward(up.p, p_hat);
    basis->forward(up.r, r_hat);
    basis->forward(s_p, sp_hat);
    basis->forward(src_r, sr_hat);
    for (std::size_t k = 0; k < n_cells; ++k) {
      const double v = nu[k];
      p_hat[k] = (p_hat[k] * idt + sp_hat[k]) / (idt + v * v);
      r_hat[k] = (r_hat[k] * idt + sr_hat[k]) / (idt + v);
    }

    AdjointState& a = series[static_cast<std::size_t>(n)];
    a.t = base.at_level(n).t;
    basis->inverse(p_hat, a.p);
    basis->inverse(r_hat, a.r);
    if (!a.p.all_finite() || !a.r.all_finite())
      throw NumericalFailure("adjoint step produced non-finite values");
    a.q = reconstruct_q(base.at_level(n), a.p, a.r);
  }
  return series;
}

ReducedGradient reduced_gradient(const Trajectory& base,
                                 const std::vector<AdjointState>& adj,
                                 const CostSpec& cost, double tau) {
  const long M = tau_level(base, tau);
  if (static_cast<long>(adj.size()) != M + 1)
    throw std::invalid_argument("reduced_gradient: adjoint series does not match tau");
  const Grid& grid = base.initial().phi.grid;
  const double dt = base.dt;

  // Gradient lives on the control's slab layout; analytic controls get one
  // slab per solver step.
  Control grad;
  const Control& u = base.control;
  if (u.kind() == Control::Kind::tabulated) {
    grad = u;
  } else {
    const int n_slabs = static_cast<int>(std::max<long>(base.steps_taken, 1));
    grad = Control::tabulated(grid, n_slabs, base.final_state().t, 0.0,
                              Field(grid, -1e300), Field(grid, 1e300));
    Field u_s(grid);
    for (int s = 0; s < n_slabs; ++s) {
      u.sample_into(s * dt, u_s);
      std::copy(u_s.values.begin(), u_s.values.end(), grad.slab(s));
    }
  }

  // grad = beta_u u + (slab average of r 1_[0,tau]). Solver step n (covering
  // [t_n, t_{n+1})) pairs with the adjoint at level n+1: the control on that
  // step first enters sigma at level n+1, so dJ/du_n carries r_{n+1}; in
  // particular the step ending exactly at tau carries r(tau) = 0.
  const double slab_len = grad.slab_length();
  for (int s = 0; s < grad.n_slabs(); ++s) {
    double* gs = grad.slab(s);
    for (int i = 0; i < grid.cells(); ++i) gs[i] *= cost.beta_u;
    const double t_lo = s * slab_len, t_hi = (s + 1) * slab_len;
    const long n_lo = std::lround(std::ceil(t_lo / dt - 1e-9));
    const long n_hi = std::min<long>(M, std::lround(std::ceil(t_hi / dt - 1e-9)));
    for (long n = n_lo; n < n_hi; ++n) {
      const Field& r = adj[static_cast<std::size_t>(n + 1)].r;
      const double w = dt / slab_len;
      for (int i = 0; i < grid.cells(); ++i) gs[i] += w * r[i];
    }
  }

  ReducedGradient rg;
  rg.grad_u = std::move(grad);

  // D_tau of the reduced cost, with phi_t(tau) the scheme's backward
  // difference (forward at tau = 0).
  const State& at_tau = base.at_level(M);
  Field phi_t(grid);
  if (M > 0) {
    const State& prev = base.at_level(M - 1);
    for (std::size_t i = 0; i < phi_t.size(); ++i)
      phi_t[i] = (at_tau.phi[i] - prev.phi[i]) / dt;
  } else if (base.steps_taken > 0) {
    const State& next = base.at_level(1);
    for (std::size_t i = 0; i < phi_t.size(); ++i)
      phi_t[i] = (next.phi[i] - at_tau.phi[i]) / dt;
  }

  double v = cost.beta_T;
  const double vol = grid.cell_volume();
  if (cost.beta_Q > 0) {
    const Field& target = cost.phi_Q.at(M);
    double s = 0;
    for (std::size_t i = 0; i < phi_t.size(); ++i) {
      const double d = at_tau.phi[i] - target[i];
      s += d * d;
    }
    v += 0.5 * cost.beta_Q * s * vol;
  }
  if (cost.beta_Omega > 0) {
    double s = 0;
    for (std::size_t i = 0; i < phi_t.size(); ++i)
      s += (at_tau.phi[i] - cost.phi_Omega[i]) * phi_t[i];
    v += cost.beta_Omega * s * vol;
  }
  if (cost.alpha_Q > 0) {
    const Field& target = cost.sigma_Q.at(M);
    double s = 0;
    for (std::size_t i = 0; i < phi_t.size(); ++i) {
      const double d = at_tau.sigma[i] - target[i];
      s += d * d;
    }
    v += 0.5 * cost.alpha_Q * s * vol;
  }
  if (cost.beta_S > 0) {
    double s = 0;
    for (std::size_t i = 0; i < phi_t.size(); ++i) s += phi_t[i];
    v += 0.5 * cost.beta_S * s * vol;
  }
  rg.dJ_dtau = v;
  return rg;
}

}  // namespace cht
