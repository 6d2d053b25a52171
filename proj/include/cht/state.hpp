// Time integration of the coupled Cahn-Hilliard/nutrient system with the
// linearly implicit stabilized scheme, plus per-step energy/mass diagnostics.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cht/control.hpp"
#include "cht/grid.hpp"
#include "cht/model.hpp"

namespace cht {

// Raised when an update produces a non-finite value; the CLI maps it to a
// dedicated exit code.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct State {
  Field phi, mu, sigma;
  double t = 0.0;
};

enum class AdaptPolicy { off, halve_on_energy_rise };

struct SchemeParams {
  double dt = 1e-3;
  double kappa = 5.75;  // default: max F'' over [-1.5, 1.5] for the quartic
  AdaptPolicy adapt = AdaptPolicy::off;
  long max_steps = 1000000;
  double t_end = 1.0;

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SchemeParams: dt must be positive");
    if (kappa < 0.0) throw std::invalid_argument("SchemeParams: kappa must be nonnegative");
    if (max_steps < 1) throw std::invalid_argument("SchemeParams: max_steps must be positive");
  }
};

struct StepDiagnostics {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;
  double mass_phi = 0.0;
  double mass_sigma = 0.0;
  double mass_total_predicted = 0.0;  // initial total + running dt*int(u)
  double dissipation = 0.0;           // |grad mu|^2 + |grad sigma|^2 + int P (mu-sigma)^2
  double energy_identity_residual = 0.0;
  double source_work = 0.0;  // int u sigma
  double rate = 0.0;         // |dphi|_(H1)' / dt + |dsigma|_L2 / dt
};

struct Trajectory {
  std::vector<double> snapshot_times;
  std::vector<State> states;  // strided snapshots; always includes t=0 and final
  std::vector<StepDiagnostics> diagnostics;  // one row per step, plus the t=0 row
  Control control;
  double dt = 0.0;       // nominal dt (steps may be shorter under adaptivity)
  int store_every = 1;
  long steps_taken = 0;

  const State& initial() const { return states.front(); }
  const State& final_state() const { return states.back(); }
  bool stores_all_levels() const { return store_every == 1; }
  // State at time level n; the trajectory must store every level.
  const State& at_level(long n) const {
    if (!stores_all_levels())
      throw std::logic_error("Trajectory: level access on a strided trajectory");
    return states.at(static_cast<std::size_t>(n));
  }
};

// mu = -Laplacian(phi) + F'(phi)
Field compute_mu(const ModelSpec& m, const Field& phi);

// R = P(phi) (sigma - mu)
Field reaction(const ModelSpec& m, const Field& phi, const Field& sigma, const Field& mu);

// One step of the linearly implicit stabilized scheme. Mode 0 reproduces the
// exact discrete mass ledger by construction.
State step(const ModelSpec& m, const State& s, const Field& u_n, const SchemeParams& p);

// March from (phi0, sigma0) at t=0 until t_end (or max_steps), recording
// diagnostics every step and state snapshots every store_every steps. The
// optional predicate stops the march early after a recorded step; the
// optional observer sees every accepted state without it being stored.
using StopPredicate = std::function<bool(const StepDiagnostics&)>;
using StepObserver = std::function<void(const State&, const StepDiagnostics&)>;

Trajectory run(const ModelSpec& m, const Field& phi0, const Field& sigma0,
               const Control& control, const SchemeParams& p, int store_every = 1,
               const StopPredicate& stop = nullptr,
               const StepObserver& observe = nullptr);

// Dissipation functional A(t) for a state.
double dissipation(const ModelSpec& m, const State& s);

}  // namespace cht
