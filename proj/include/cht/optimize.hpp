// Cost evaluation, FONC residuals, and the block-coordinate optimizer:
// projected gradient with Armijo backtracking in u, exact node search in tau.
#pragma once

#include <vector>

#include "cht/adjoint.hpp"
#include "cht/cost.hpp"
#include "cht/state.hpp"

namespace cht {

// Discrete cost: midpoint in space, left rectangle in time; tau must be a
// node of the trajectory's time grid. Tracking terms need a trajectory that
// stores every level.
double evaluate_cost(const Trajectory& traj, const CostSpec& cost, double tau);

// Stationarity measure |u - clip(u - grad)|_{L2(Q)}; zero iff the discrete
// variational inequality holds on the grid.
double fonc_residual(const Control& u, const Control& grad);

enum class TauClassification { nonneg_at_zero, interior, nonpos_at_T };

struct OptimizeOptions {
  double tol_u = 1e-8;
  double tol_tau = 1e-8;  // |dJ/dtau| threshold for the interior classification
  int max_outer = 100;
  int max_u_steps_per_outer = 40;
  int max_backtracks = 60;
  double armijo_c = 1e-4;
};

struct OptimizeResult {
  Control u_star;
  double tau_star = 0;
  std::vector<double> J_history;  // nonincreasing over accepted iterates
  double fonc_residual_u = 0;
  double dJ_dtau_star = 0;
  TauClassification tau_class = TauClassification::interior;
  int iterations = 0;
  bool converged = false;
};

// Block-coordinate descent for the free-terminal-time problem. u0 must be a
// tabulated control whose slab count divides the number of solver steps on
// [0, T].
OptimizeResult optimize(const ModelSpec& m, const CostSpec& cost, const Field& phi0,
                        const Field& sigma0, const Control& u0,
                        const SchemeParams& scheme, const OptimizeOptions& opts = {});

const char* to_string(TauClassification c);

}  // namespace cht
