// Linearization of the control-to-state map along a base trajectory and the
// finite-difference check of the Frechet-derivative property.
#pragma once

#include <vector>

#include "cht/state.hpp"

namespace cht {

struct LinearizedState {
  Field xi, eta, rho;
  double t = 0.0;
};

// Solve the linearized system along `base` (which must store every level)
// with direction h; xi(0) = rho(0) = 0. Uses the same linearly implicit
// scheme with F''(phi_bar) xi in place of F'(phi) and the reaction
// linearization P'(phi_bar)(sigma_bar - mu_bar) xi + P(phi_bar)(rho - eta)
// treated explicitly.
std::vector<LinearizedState> solve_linearized(const ModelSpec& m,
                                              const Trajectory& base,
                                              const Control& h,
                                              const SchemeParams& scheme);

struct FrechetRow {
  double epsilon = 0;
  double err_phi = 0;    // L2(Q) error of (S1(u+eps h)-S1(u))/eps vs xi
  double err_sigma = 0;  // same for sigma vs rho
  double err_total = 0;
  bool floored = false;  // below the resolution floor; excluded from the slope
};

struct FrechetReport {
  std::vector<FrechetRow> rows;  // epsilons in the order given
  double slope = 0;              // log-log slope over the rows above the floor
  int n_used = 0;
};

// err(eps) for each eps, plus the fitted slope. u and u + eps h are run with
// the same scheme; epsilons must be strictly decreasing and positive.
FrechetReport frechet_check(const ModelSpec& m, const Field& phi0,
                            const Field& sigma0, const Control& u, const Control& h,
                            const std::vector<double>& epsilons,
                            const SchemeParams& scheme);

// L2(Q) norm of the level-wise difference of two same-layout field series.
double l2q_series_distance(const std::vector<Field>& a, const std::vector<Field>& b,
                           double dt);

}  // namespace cht
