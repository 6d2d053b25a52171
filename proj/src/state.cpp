#include "cht/state.hpp"

#include <cmath>

#include "cht/spectral.hpp"

namespace cht {

Field compute_mu(const ModelSpec& m, const Field& phi) {
  Field mu = laplacian(phi);
  for (std::size_t i = 0; i < mu.size(); ++i)
    mu[i] = -mu[i] + m.potential.deriv(phi[i]);
  return mu;
}

Field reaction(const ModelSpec& m, const Field& phi, const Field& sigma,
               const Field& mu) {
  phi.require_same_grid(sigma);
  phi.require_same_grid(mu);
  Field r(phi.grid);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = m.proliferation.value(phi[i]) * (sigma[i] - mu[i]);
  return r;
}

double dissipation(const ModelSpec& m, const State& s) {
  double pw = 0.0;
  for (std::size_t i = 0; i < s.phi.size(); ++i) {
    const double d = s.mu[i] - s.sigma[i];
    pw += m.proliferation.value(s.phi[i]) * d * d;
  }
  return h1_semi_sq(s.mu) + h1_semi_sq(s.sigma) + pw * s.phi.grid.cell_volume();
}

namespace {

// Scratch buffers for one scheme step; reused across steps of a run.
struct StepWorkspace {
  std::vector<double> phi_hat, sig_hat, g_hat, r_hat, u_hat, mu_hat;
  Field g, r, u;
};

struct StepOutcome {
  State next;
  double rate = 0.0;  // |dphi|_(H1)'/dt + |dsigma|_L2/dt
};

StepOutcome advance(const ModelSpec& m, const State& s, const Control& control,
                    const SchemeParams& p, double dt, StepWorkspace& w) {
  const Grid& grid = s.phi.grid;
  auto basis = CosineBasis::get(grid);
  const auto& nu = basis->eigenvalues();
  const std::size_t n = s.phi.size();

  w.g.grid = grid;
  w.g.values.resize(n);
  w.r.grid = grid;
  w.r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.g[i] = m.potential.deriv(s.phi[i]);
    w.r[i] = m.proliferation.value(s.phi[i]) * (s.sigma[i] - s.mu[i]);
  }

  basis->forward(s.phi, w.phi_hat);
  basis->forward(s.sigma, w.sig_hat);
  basis->forward(w.g, w.g_hat);
  basis->forward(w.r, w.r_hat);
  const bool with_u = !control.is_zero();
  if (with_u) {
    control.sample_into(s.t, w.u);
    basis->forward(w.u, w.u_hat);
  }

  const double idt = 1.0 / dt;
  const double kap = p.kappa;
  w.mu_hat.resize(n);
  double dual_sq = 0.0, dsig_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = nu[k];
    const double phi_new = (w.phi_hat[k] * idt + w.r_hat[k] - v * w.g_hat[k] +
                            kap * v * w.phi_hat[k]) /
                           (idt + v * v + kap * v);
    const double uk = with_u ? w.u_hat[k] : 0.0;
    const double sig_new = (w.sig_hat[k] * idt - w.r_hat[k] + uk) / (idt + v);
    w.mu_hat[k] = v * phi_new + w.g_hat[k] + kap * (phi_new - w.phi_hat[k]);
    const double dphi = phi_new - w.phi_hat[k];
    const double dsig = sig_new - w.sig_hat[k];
    dual_sq += (k == 0) ? dphi * dphi : dphi * dphi / v;
    dsig_sq += dsig * dsig;
    w.phi_hat[k] = phi_new;
    w.sig_hat[k] = sig_new;
  }

  StepOutcome out;
  out.next.t = s.t + dt;
  basis->inverse(w.phi_hat, out.next.phi);
  basis->inverse(w.mu_hat, out.next.mu);
  basis->inverse(w.sig_hat, out.next.sigma);
  out.rate = (std::sqrt(dual_sq) + std::sqrt(dsig_sq)) * idt;

  if (!out.next.phi.all_finite() || !out.next.sigma.all_finite() ||
      !out.next.mu.all_finite())
    throw NumericalFailure("state step produced non-finite values at t=" +
                           std::to_string(out.next.t));
  return out;
}

}  // namespace

State step(const ModelSpec& m, const State& s, const Field& u_n,
           const SchemeParams& p) {
  p.validate();
  s.phi.require_same_grid(s.sigma);
  s.phi.require_same_grid(s.mu);
  StepWorkspace w;
  // Wrap the sampled field as a single-slab control spanning exactly this step.
  bool zero_u = true;
  for (double v : u_n.values)
    if (v != 0.0) {
      zero_u = false;
      break;
    }
  if (zero_u) {
    return advance(m, s, Control::zero(s.phi.grid), p, p.dt, w).next;
  }
  Control c = Control::tabulated(u_n.grid, 1, s.t + p.dt + 1.0, 0.0,
                                 Field(u_n.grid, -1e300), Field(u_n.grid, 1e300));
  std::copy(u_n.values.begin(), u_n.values.end(), c.slab(0));
  return advance(m, s, c, p, p.dt, w).next;
}

Trajectory run(const ModelSpec& m, const Field& phi0, const Field& sigma0,
               const Control& control, const SchemeParams& p, int store_every,
               const StopPredicate& stop, const StepObserver& observe) {
  p.validate();
  if (!(p.t_end > 0.0)) throw std::invalid_argument("run: t_end must be positive");
  if (store_every < 1) throw std::invalid_argument("run: store_every must be positive");
  phi0.require_same_grid(sigma0);
  if (!phi0.all_finite() || !sigma0.all_finite())
    throw std::invalid_argument("run: initial data must be finite");

  Trajectory traj;
  traj.control = control;
  traj.dt = p.dt;
  traj.store_every = store_every;

  State s;
  s.phi = phi0;
  s.sigma = sigma0;
  s.mu = compute_mu(m, phi0);
  s.t = 0.0;

  const double vol = phi0.grid.cell_volume();
  auto mass_of = [vol](const Field& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc * vol;
  };

  double energy_prev = energy_total(m, s.phi, s.sigma);
  double ledger = mass_of(phi0) + mass_of(sigma0);

  StepDiagnostics d0;
  d0.step = 0;
  d0.t = 0.0;
  d0.energy = energy_prev;
  d0.mass_phi = mass_of(s.phi);
  d0.mass_sigma = mass_of(s.sigma);
  d0.mass_total_predicted = ledger;
  d0.dissipation = dissipation(m, s);
  traj.diagnostics.push_back(d0);
  traj.snapshot_times.push_back(0.0);
  traj.states.push_back(s);

  StepWorkspace w;
  Field u_sample(phi0.grid);
  double dt = p.dt;
  long n = 0;
  while (s.t < p.t_end - 0.5 * dt && n < p.max_steps) {
    StepOutcome out = advance(m, s, control, p, dt, w);
    double energy_new = energy_total(m, out.next.phi, out.next.sigma);

    if (p.adapt == AdaptPolicy::halve_on_energy_rise && control.is_zero()) {
      int halvings = 0;
      while (energy_new > energy_prev + 1e-10 && halvings < 20) {
        dt *= 0.5;
        ++halvings;
        out = advance(m, s, control, p, dt, w);
        energy_new = energy_total(m, out.next.phi, out.next.sigma);
      }
    }

    double source_mass = 0.0, source_work = 0.0;
    if (!control.is_zero()) {
      control.sample_into(s.t, u_sample);
      double sm = 0.0, sw = 0.0;
      for (std::size_t i = 0; i < u_sample.size(); ++i) {
        sm += u_sample[i];
        sw += u_sample[i] * out.next.sigma[i];
      }
      source_mass = sm * vol;
      source_work = sw * vol;
    }

    ++n;
    s = std::move(out.next);
    ledger += dt * source_mass;

    StepDiagnostics d;
    d.step = n;
    d.t = s.t;
    d.energy = energy_new;
    d.mass_phi = mass_of(s.phi);
    d.mass_sigma = mass_of(s.sigma);
    d.mass_total_predicted = ledger;
    d.dissipation = dissipation(m, s);
    d.source_work = source_work;
    d.energy_identity_residual =
        std::abs(energy_new - energy_prev + dt * d.dissipation - dt * source_work);
    d.rate = out.rate;
    traj.diagnostics.push_back(d);
    energy_prev = energy_new;

    if (observe) observe(s, d);
    if (n % store_every == 0) {
      traj.snapshot_times.push_back(s.t);
      traj.states.push_back(s);
    }
    if (stop && stop(d)) break;
  }
  if (traj.snapshot_times.back() != s.t) {
    traj.snapshot_times.push_back(s.t);
    traj.states.push_back(s);
  }
  traj.steps_taken = n;
  return traj;
}

}  // namespace cht
