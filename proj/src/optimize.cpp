#include "cht/optimize.hpp"

#include <cmath>

namespace cht {

namespace {

double control_l2q_sq(const Control& u, const Trajectory& traj) {
  switch (u.kind()) {
    case Control::Kind::zero:
      return 0.0;
    case Control::Kind::tabulated: {
      const double n = u.l2q_norm();
      return n * n;
    }
    case Control::Kind::decaying_source: {
      // Left-rectangle sum consistent with the solver sampling.
      double s = 0.0;
      Field u_n(u.grid());
      for (long n = 0; n < traj.steps_taken; ++n) {
        u.sample_into(n * traj.dt, u_n);
        s += inner(u_n, u_n) * traj.dt;
      }
      return s;
    }
  }
  return 0.0;
}

double tracking_term(const Trajectory& traj, const TimeTarget& target, long level,
                     bool phi_part) {
  const State& s = traj.at_level(level);
  const Field& f = phi_part ? s.phi : s.sigma;
  const Field& g = target.at(level);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - g[i];
    acc += d * d;
  }
  return acc * f.grid.cell_volume();
}

}  // namespace

double evaluate_cost(const Trajectory& traj, const CostSpec& cost, double tau) {
  const long M = tau_level(traj, tau);
  const Grid& grid = traj.initial().phi.grid;
  cost.validate_targets(grid);
  if ((cost.beta_Q > 0 || cost.alpha_Q > 0) && !traj.stores_all_levels())
    throw std::invalid_argument("evaluate_cost: tracking terms need every level stored");

  double J = cost.beta_T * tau;
  const double dt = traj.dt;
  if (cost.beta_Q > 0)
    for (long n = 0; n < M; ++n)
      J += 0.5 * cost.beta_Q * dt * tracking_term(traj, cost.phi_Q, n, true);
  if (cost.alpha_Q > 0)
    for (long n = 0; n < M; ++n)
      J += 0.5 * cost.alpha_Q * dt * tracking_term(traj, cost.sigma_Q, n, false);

  const State& at_tau = traj.at_level(M);
  if (cost.beta_Omega > 0) {
    double s = 0.0;
    for (std::size_t i = 0; i < at_tau.phi.size(); ++i) {
      const double d = at_tau.phi[i] - cost.phi_Omega[i];
      s += d * d;
    }
    J += 0.5 * cost.beta_Omega * s * grid.cell_volume();
  }
  if (cost.beta_S > 0)
    J += 0.5 * cost.beta_S * (grid.measure() + integrate(at_tau.phi));
  if (cost.beta_u > 0) J += 0.5 * cost.beta_u * control_l2q_sq(traj.control, traj);
  return J;
}

double fonc_residual(const Control& u, const Control& grad) {
  Control trial = u;
  for (std::size_t i = 0; i < trial.raw_values().size(); ++i)
    trial.raw_values()[i] -= grad.raw_values()[i];
  trial = project_box(trial);
  return l2q_distance(u, trial);
}

const char* to_string(TauClassification c) {
  switch (c) {
    case TauClassification::nonneg_at_zero:
      return "nonnegative_at_zero";
    case TauClassification::interior:
      return "zero_interior";
    case TauClassification::nonpos_at_T:
      return "nonpositive_at_T";
  }
  return "?";
}

namespace {

// J(u, s) for every node s of the trajectory grid, via prefix sums of the
// tracking integrands.
std::vector<double> cost_per_node(const Trajectory& traj, const CostSpec& cost) {
  const long N = traj.steps_taken;
  const double dt = traj.dt;
  const Grid& grid = traj.initial().phi.grid;
  const double u_term =
      cost.beta_u > 0 ? 0.5 * cost.beta_u * control_l2q_sq(traj.control, traj) : 0.0;

  std::vector<double> J(static_cast<std::size_t>(N) + 1, 0.0);
  double running = 0.0;
  for (long s = 0; s <= N; ++s) {
    double v = running + cost.beta_T * traj.at_level(s).t + u_term;
    const State& at_s = traj.at_level(s);
    if (cost.beta_Omega > 0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < at_s.phi.size(); ++i) {
        const double d = at_s.phi[i] - cost.phi_Omega[i];
        acc += d * d;
      }
      v += 0.5 * cost.beta_Omega * acc * grid.cell_volume();
    }
    if (cost.beta_S > 0)
      v += 0.5 * cost.beta_S * (grid.measure() + integrate(at_s.phi));
    J[static_cast<std::size_t>(s)] = v;
    if (s < N) {
      if (cost.beta_Q > 0)
        running += 0.5 * cost.beta_Q * dt * tracking_term(traj, cost.phi_Q, s, true);
      if (cost.alpha_Q > 0)
        running += 0.5 * cost.alpha_Q * dt * tracking_term(traj, cost.sigma_Q, s, false);
    }
  }
  return J;
}

}  // namespace

OptimizeResult optimize(const ModelSpec& m, const CostSpec& cost, const Field& phi0,
                        const Field& sigma0, const Control& u0,
                        const SchemeParams& scheme, const OptimizeOptions& opts) {
  const Grid& grid = phi0.grid;
  cost.validate(grid);
  if (u0.kind() != Control::Kind::tabulated)
    throw std::invalid_argument("optimize: initial control must be tabulated");

  SchemeParams p = scheme;
  p.t_end = cost.T;
  p.adapt = AdaptPolicy::off;
  const long n_steps = std::lround(cost.T / p.dt);
  if (std::abs(n_steps * p.dt - cost.T) > 1e-9 * cost.T)
    throw std::invalid_argument("optimize: dt must divide T");
  if (n_steps % u0.n_slabs() != 0)
    throw std::invalid_argument("optimize: control slabs must align with solver steps");
  if (std::abs(u0.t_end() - cost.T) > 1e-12 * cost.T)
    throw std::invalid_argument("optimize: control horizon must equal T");

  OptimizeResult res;
  Control u = project_box(u0);

  Trajectory traj = run(m, phi0, sigma0, u, p, 1);
  std::vector<double> per_node = cost_per_node(traj, cost);
  long tau_idx = 0;
  for (long s = 1; s <= traj.steps_taken; ++s)
    if (per_node[static_cast<std::size_t>(s)] <
        per_node[static_cast<std::size_t>(tau_idx)])
      tau_idx = s;
  double tau = traj.at_level(tau_idx).t;
  double J = per_node[static_cast<std::size_t>(tau_idx)];
  res.J_history.push_back(J);

  auto gradient_at = [&](const Trajectory& t_cur, double tau_cur) {
    auto adj = solve_adjoint(m, t_cur, cost, tau_cur);
    return reduced_gradient(t_cur, adj, cost, tau_cur);
  };

  bool converged = false;
  int outer = 0;
  double residual = 0.0;
  ReducedGradient rg;

  for (; outer < opts.max_outer && !converged; ++outer) {
    // (a) projected gradient steps in u at fixed tau
    bool u_stalled = false;
    for (int it = 0; it < opts.max_u_steps_per_outer; ++it) {
      rg = gradient_at(traj, tau);
      residual = fonc_residual(u, rg.grad_u);
      if (residual <= opts.tol_u) break;

      double alpha = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < opts.max_backtracks; ++bt) {
        Control trial = u;
        for (std::size_t i = 0; i < trial.raw_values().size(); ++i)
          trial.raw_values()[i] -= alpha * rg.grad_u.raw_values()[i];
        trial = project_box(trial);
        const double step_norm = l2q_distance(trial, u);
        if (step_norm == 0.0) break;
        Trajectory t_trial = run(m, phi0, sigma0, trial, p, 1);
        const double J_trial = evaluate_cost(t_trial, cost, tau);
        if (J_trial <= J - opts.armijo_c / alpha * step_norm * step_norm) {
          u = std::move(trial);
          traj = std::move(t_trial);
          J = J_trial;
          res.J_history.push_back(J);
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        u_stalled = true;
        break;
      }
    }

    // (b) exact tau search over all grid nodes from the cached trajectory
    per_node = cost_per_node(traj, cost);
    long best = 0;
    for (long s = 1; s <= traj.steps_taken; ++s)
      if (per_node[static_cast<std::size_t>(s)] <
          per_node[static_cast<std::size_t>(best)])
        best = s;
    bool tau_moved = false;
    if (best != tau_idx && per_node[static_cast<std::size_t>(best)] < J) {
      tau_idx = best;
      tau = traj.at_level(tau_idx).t;
      J = per_node[static_cast<std::size_t>(best)];
      res.J_history.push_back(J);
      tau_moved = true;
    }

    rg = gradient_at(traj, tau);
    residual = fonc_residual(u, rg.grad_u);
    if (residual <= opts.tol_u && !tau_moved) converged = true;
    // no step accepted in u and tau settled: further rounds cannot progress
    if (u_stalled && !tau_moved && !converged) break;
  }

  res.u_star = std::move(u);
  res.tau_star = tau;
  res.fonc_residual_u = residual;
  res.dJ_dtau_star = rg.dJ_dtau;
  res.iterations = outer;
  res.converged = converged;
  if (tau_idx == 0)
    res.tau_class = TauClassification::nonneg_at_zero;
  else if (tau_idx == traj.steps_taken)
    res.tau_class = TauClassification::nonpos_at_T;
  else
    res.tau_class = TauClassification::interior;
  return res;
}

}  // namespace cht
