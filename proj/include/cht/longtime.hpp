// Equilibrium detection, decay-rate fitting, the Lojasiewicz-exponent
// regression, the nonlocal elliptic steady problem, and Lyapunov stability
// probes.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cht/state.hpp"

namespace cht {

struct EquilibriumReport {
  Field phi_inf;
  double sigma_inf_mean = 0;
  double sigma_inf_std = 0;   // spatial std of sigma at the final state
  double mu_inf_mean = 0;
  double residual_stationary = 0;  // |-Lap phi + F'(phi) - mu_mean|_L2
  double relation_gap = 0;         // |sigma_mean - mu_mean|
  double mu_mean_gap = 0;            // |mu_mean - mean F'(phi)|
  double reaction_residual = 0;    // |P(phi)(sigma - mu)|_L2
  double mass_m_inf = 0;           // |Omega|^{-1} int (phi + sigma)
  double mass_ledger_gap = 0;      // |m_inf - ledger prediction|
  double energy_inf = 0;
  bool converged = false;
  double t_final = 0;
  long steps = 0;
};

struct EquilibriumOptions {
  double tol = 1e-9;              // on the rate metric |dphi|'/dt + |dsigma|/dt
  double residual_accept = 1e-6;  // discretization-limited residual acceptance
};

// Integrate until the rate metric drops below tol (or max_steps). The control
// must be zero or the decaying-source template. Non-convergence is reported,
// not thrown.
std::pair<Trajectory, EquilibriumReport> run_to_equilibrium(
    const ModelSpec& m, const Field& phi0, const Field& sigma0,
    const Control& control, const SchemeParams& scheme,
    const EquilibriumOptions& opts = {}, int store_every = 0 /*0: sparse*/);

// Recompute the report residuals for a given final state (used by tests and
// by run_to_equilibrium itself).
EquilibriumReport characterize_equilibrium(const ModelSpec& m, const State& s,
                                           double ledger_mass_mean);

struct DecayFit {
  double lambda = 0;     // fitted exponent in C (1+t)^{-lambda}
  double prefactor = 0;  // fitted C
  double t_a = 0, t_b = 0;
  double r_squared = 0;
  int n_samples = 0;
  bool super_polynomial = false;  // lambda > 4: data decays faster than any
                                  // moderate power law on the window
};

// Least squares of log(value) against log(1+t) on [t_a, t_b]; requires at
// least 10 samples with positive values.
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& value,
                        double t_a, double t_b);

struct LojasiewiczEstimate {
  double theta_hat = 0;  // in (0, 1/2] when reliable
  double slope = 0;      // regression slope of log|E - E_inf| vs log D
  double t_a = 0, t_b = 0;
  double fit_residual = 0;  // RMS residual of the regression
  int n_samples = 0;
  bool reliable = false;
};

// Regress log|E(t) - E_inf| against log D(t) along a u == 0 trajectory;
// slope ~ 1/(1-theta). Heuristic: no claim of matching the analytic theta.
LojasiewiczEstimate estimate_lojasiewicz(const Trajectory& traj,
                                         const EquilibriumReport& eq,
                                         double t_a = 0.0, double t_b = -1.0);

struct SteadyResult {
  Field phi;
  double residual = 0;  // |-Lap phi + F'(phi) - (m - mean phi)|_L2
  double upsilon_value = 0;
  long iterations = 0;
  bool converged = false;
  std::vector<double> upsilon_history;  // Upsilon at every accepted iterate
};

struct SteadyOptions {
  double tol = 1e-8;
  long max_iterations = 500000;
};

// Residual of the nonlocal elliptic problem at phi.
double steady_residual(const ModelSpec& m, const Field& phi, double mass);

// Gradient flow on Upsilon with backtracking line search; Upsilon is
// nonincreasing across accepted iterates.
SteadyResult solve_nonlocal_elliptic(const ModelSpec& m, double mass,
                                     const Field& phi_init,
                                     const SteadyOptions& opts = {});

struct StabilityReport {
  double eta = 0;
  double epsilon = 0;
  double sup_deviation = 0;  // max over probes and time of the H1 x L2 metric
  bool stayed_within = false;
  double horizon = 0;
  int n_probes = 0;
  std::vector<double> probe_sup;  // per-probe sup of the deviation metric
};

// Perturb (phi*, sigma*) by n seeded band-limited perturbations of size eta
// (H1 x L2, mean-free in phi+sigma), run each to the horizon with u == 0, and
// record the sup of |phi - phi*|_H1 + |sigma - sigma*|_L2.
StabilityReport lyapunov_probe(const ModelSpec& m, const Field& phi_star,
                               const Field& sigma_star, double eta, double epsilon,
                               double horizon, int n_perturbations,
                               std::uint64_t seed, const SchemeParams& scheme);

}  // namespace cht
