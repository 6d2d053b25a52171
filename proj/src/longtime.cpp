#include "cht/longtime.hpp"

#include <algorithm>
#include <cmath>

#include "cht/random.hpp"
#include "cht/spectral.hpp"

namespace cht {

namespace {

struct LineFit {
  double slope = 0, intercept = 0, r_squared = 0, rms_residual = 0;
  int n = 0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.n = static_cast<int>(x.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / f.n, my = sy / f.n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < f.n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  f.rms_residual = std::sqrt(ss_res / f.n);
  return f;
}

double spatial_std(const Field& f) {
  const double m = mean(f);
  double s = 0.0;
  for (double v : f.values) s += (v - m) * (v - m);
  return std::sqrt(s / f.size());
}

// Upsilon(phi + d) - Upsilon(phi), assembled term by term without evaluating
// the two large totals; accurate at the resolution of the decrement itself.
double upsilon_delta(const ModelSpec& m, const Field& phi, const Field& d,
                     double mass) {
  const Grid& g = phi.grid;
  const int nx = g.n[0];
  const int ny = g.dim == 2 ? g.n[1] : 1;
  const double vol = g.cell_volume();

  // Dirichlet part: sum over faces of ((fp+fd)^2 - fp^2)/(2 h^2).
  double grad_part = 0.0;
  const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const double fp = phi[j * nx + i + 1] - phi[j * nx + i];
      const double fd = d[j * nx + i + 1] - d[j * nx + i];
      grad_part += 0.5 * ihx2 * fd * (2.0 * fp + fd);
    }
  if (g.dim == 2) {
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double fp = phi[(j + 1) * nx + i] - phi[j * nx + i];
        const double fd = d[(j + 1) * nx + i] - d[j * nx + i];
        grad_part += 0.5 * ihy2 * fd * (2.0 * fp + fd);
      }
  }

  double pot_part = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    pot_part += m.potential.delta(phi[i], d[i]);

  const double a = mass - mean(phi);
  const double dm = mean(d);
  const double pen_part = 0.5 * g.measure() * dm * (dm - 2.0 * a);

  return (grad_part + pot_part) * vol + pen_part;
}

}  // namespace

EquilibriumReport characterize_equilibrium(const ModelSpec& m, const State& s,
                                           double ledger_mass_mean) {
  EquilibriumReport r;
  r.phi_inf = s.phi;
  r.t_final = s.t;
  r.sigma_inf_mean = mean(s.sigma);
  r.sigma_inf_std = spatial_std(s.sigma);
  r.mu_inf_mean = mean(s.mu);

  Field stationary = laplacian(s.phi);
  double fp_mean = 0.0;
  for (std::size_t i = 0; i < stationary.size(); ++i) {
    const double fp = m.potential.deriv(s.phi[i]);
    fp_mean += fp;
    stationary[i] = -stationary[i] + fp - r.mu_inf_mean;
  }
  fp_mean *= s.phi.grid.cell_volume() / s.phi.grid.measure();
  r.residual_stationary = l2_norm(stationary);
  r.relation_gap = std::abs(r.sigma_inf_mean - r.mu_inf_mean);
  r.mu_mean_gap = std::abs(r.mu_inf_mean - fp_mean);

  Field reac = reaction(m, s.phi, s.sigma, s.mu);
  r.reaction_residual = l2_norm(reac);

  r.mass_m_inf = (integrate(s.phi) + integrate(s.sigma)) / s.phi.grid.measure();
  r.mass_ledger_gap = std::abs(r.mass_m_inf - ledger_mass_mean);
  r.energy_inf = energy_total(m, s.phi, s.sigma);
  return r;
}

std::pair<Trajectory, EquilibriumReport> run_to_equilibrium(
    const ModelSpec& m, const Field& phi0, const Field& sigma0,
    const Control& control, const SchemeParams& scheme,
    const EquilibriumOptions& opts, int store_every) {
  if (control.kind() == Control::Kind::tabulated)
    throw std::invalid_argument(
        "run_to_equilibrium: control must be zero or the decaying-source template");
  SchemeParams p = scheme;
  p.t_end = scheme.max_steps * scheme.dt * 2.0;  // stop on rate or max_steps
  if (store_every == 0)
    store_every = static_cast<int>(std::max<long>(1, scheme.max_steps / 512));

  bool hit_tol = false;
  auto stop = [&](const StepDiagnostics& d) {
    if (d.rate <= opts.tol) {
      hit_tol = true;
      return true;
    }
    return false;
  };
  Trajectory traj = run(m, phi0, sigma0, control, p, store_every, stop);

  // The discrete ledger: initial total plus the per-step source sums.
  const double ledger_mean =
      traj.diagnostics.back().mass_total_predicted / phi0.grid.measure();
  EquilibriumReport rep = characterize_equilibrium(m, traj.final_state(), ledger_mean);
  rep.steps = traj.steps_taken;
  rep.converged = hit_tol && rep.residual_stationary <= opts.residual_accept;
  return {std::move(traj), rep};
}

DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& value,
                        double t_a, double t_b) {
  if (t.size() != value.size())
    throw std::invalid_argument("fit_decay_rate: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a || t[i] > t_b) continue;
    if (!(value[i] > 0.0))
      throw std::invalid_argument("fit_decay_rate: values must be positive on the window");
    x.push_back(std::log1p(t[i]));
    y.push_back(std::log(value[i]));
  }
  if (x.size() < 10)
    throw std::invalid_argument("fit_decay_rate: window must contain at least 10 samples");
  LineFit f = least_squares(x, y);
  DecayFit d;
  d.lambda = -f.slope;
  d.prefactor = std::exp(f.intercept);
  d.t_a = t_a;
  d.t_b = t_b;
  d.r_squared = f.r_squared;
  d.n_samples = f.n;
  d.super_polynomial = d.lambda > 4.0;
  return d;
}

LojasiewiczEstimate estimate_lojasiewicz(const Trajectory& traj,
                                         const EquilibriumReport& eq, double t_a,
                                         double t_b) {
  if (!traj.control.is_zero())
    throw std::invalid_argument("estimate_lojasiewicz: requires a u == 0 trajectory");
  if (t_b < 0.0) t_b = traj.diagnostics.back().t;
  LojasiewiczEstimate est;
  est.t_a = t_a;
  est.t_b = t_b;
  std::vector<double> x, y;
  for (const auto& d : traj.diagnostics) {
    if (d.t < t_a || d.t > t_b) continue;
    const double gap = d.energy - eq.energy_inf;
    if (gap <= 1e-13 || d.dissipation <= 0.0) continue;
    x.push_back(std::log(std::sqrt(d.dissipation)));  // log D, with y(t)=0
    y.push_back(std::log(gap));
  }
  est.n_samples = static_cast<int>(x.size());
  if (est.n_samples < 10) return est;  // unreliable: degenerate window
  LineFit f = least_squares(x, y);
  est.slope = f.slope;
  est.fit_residual = f.rms_residual;
  if (f.slope > 1.0) {
    est.theta_hat = std::clamp(1.0 - 1.0 / f.slope, 1e-12, 0.5);
    est.reliable = true;
  }
  return est;
}

double steady_residual(const ModelSpec& m, const Field& phi, double mass) {
  Field g = laplacian(phi);
  const double rhs = mass - mean(phi);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = -g[i] + m.potential.deriv(phi[i]) - rhs;
  return norms(g).l2;
}

SteadyResult solve_nonlocal_elliptic(const ModelSpec& m, double mass,
                                     const Field& phi_init, const SteadyOptions& opts) {
  if (!phi_init.all_finite())
    throw std::invalid_argument("solve_nonlocal_elliptic: initial guess must be finite");
  SteadyResult res;
  Field phi = phi_init;
  double ups = upsilon(m, phi, mass);

  // Gradient of Upsilon in L2: -Lap phi + F'(phi) - (m - mean phi).
  auto gradient = [&](const Field& f) {
    Field g = laplacian(f);
    const double rhs = mass - mean(f);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = -g[i] + m.potential.deriv(f[i]) - rhs;
    return g;
  };

  const double nu_max = eigenvalue(phi.grid, phi.grid.n[0] - 1,
                                   phi.grid.dim == 2 ? phi.grid.n[1] - 1 : 0);
  double tau = 1.0 / (1.0 + nu_max + m.potential.kappa_default());
  const double tau_max = 64.0 * tau;

  long it = 0;
  res.upsilon_history.push_back(ups);
  Field step_dir(phi.grid);
  for (; it < opts.max_iterations; ++it) {
    Field g = gradient(phi);
    const double gnorm2 = inner(g, g);
    if (std::sqrt(gnorm2) <= opts.tol) break;

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      step_dir = g;
      step_dir *= -tau;
      // Direct, cancellation-free evaluation of the decrement: comparing two
      // full Upsilon evaluations stalls once the decrease drops below the
      // rounding noise of the totals.
      const double dups = upsilon_delta(m, phi, step_dir, mass);
      if (dups <= -1e-4 * tau * gnorm2) {
        phi += step_dir;
        ups += dups;
        res.upsilon_history.push_back(ups);
        tau = std::min(tau * 1.25, tau_max);
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) break;  // step collapsed; return best iterate
  }

  res.phi = std::move(phi);
  res.iterations = it;
  res.residual = steady_residual(m, res.phi, mass);
  res.upsilon_value = upsilon(m, res.phi, mass);
  res.converged = res.residual <= opts.tol;
  return res;
}

StabilityReport lyapunov_probe(const ModelSpec& m, const Field& phi_star,
                               const Field& sigma_star, double eta, double epsilon,
                               double horizon, int n_perturbations,
                               std::uint64_t seed, const SchemeParams& scheme) {
  if (!(eta >= 0.0)) throw std::invalid_argument("lyapunov_probe: eta must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("lyapunov_probe: epsilon must be positive");
  if (n_perturbations < 1)
    throw std::invalid_argument("lyapunov_probe: need at least one perturbation");
  phi_star.require_same_grid(sigma_star);

  StabilityReport rep;
  rep.eta = eta;
  rep.epsilon = epsilon;
  rep.horizon = horizon;
  rep.n_probes = n_perturbations;

  const Grid& g = phi_star.grid;
  const int k_max = std::max(2, std::min(8, g.n[0] / 4));
  SchemeParams p = scheme;
  p.t_end = horizon;

  Field devp(g), devs(g);
  for (int probe = 0; probe < n_perturbations; ++probe) {
    if (eta == 0.0) {
      // No perturbation: deviation stays zero by determinism of the scheme.
      rep.probe_sup.push_back(0.0);
      continue;
    }
    Rng rng(seed + 0x51ab5eedull * static_cast<std::uint64_t>(probe + 1));
    Field dphi = band_limited_noise(g, k_max, rng);
    Field dsig = band_limited_noise(g, k_max, rng);
    // Mass-exchange component: keeps the perturbation mean-free in phi+sigma
    // while exercising the phi <-> sigma mass split.
    const double c = 0.25 * rng.normal();
    for (std::size_t i = 0; i < dphi.size(); ++i) {
      dphi[i] += c;
      dsig[i] -= c;
    }
    const double size = h1_norm(dphi) + l2_norm(dsig);
    const double scale = size > 0.0 ? eta / size : 0.0;
    dphi *= scale;
    dsig *= scale;

    Field phi0 = phi_star, sigma0 = sigma_star;
    phi0 += dphi;
    sigma0 += dsig;

    double sup = h1_norm(dphi) + l2_norm(dsig);
    auto measure = [&](const State& s, const StepDiagnostics&) {
      devp = s.phi;
      devp -= phi_star;
      devs = s.sigma;
      devs -= sigma_star;
      sup = std::max(sup, h1_norm(devp) + l2_norm(devs));
    };
    run(m, phi0, sigma0, Control::zero(g), p,
        std::max<int>(1, static_cast<int>(p.max_steps)), nullptr, measure);
    rep.probe_sup.push_back(sup);
  }

  rep.sup_deviation = 0.0;
  for (double v : rep.probe_sup) rep.sup_deviation = std::max(rep.sup_deviation, v);
  rep.stayed_within = rep.sup_deviation <= epsilon;
  return rep;
}

}  // namespace cht
