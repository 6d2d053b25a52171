// Backward solve of the adjoint system and assembly of the reduced gradient
// in u together with the treatment-time derivative.
#pragma once

#include <vector>

#include "cht/cost.hpp"
#include "cht/state.hpp"

namespace cht {

struct AdjointState {
  Field p, q, r;
  double t = 0.0;
};

// Backward linearly implicit march of the adjoint system on [0, tau] with
// terminal data r(tau) = 0, p(tau) = beta_Omega (phi(tau) - phi_Omega) +
// beta_S / 2. q is never time-stepped: it is reconstructed from the elliptic
// relation q = Lap p - P(phi)(p - r) at every level. Returned series is
// indexed by level 0..M with tau = M dt.
std::vector<AdjointState> solve_adjoint(const ModelSpec& m, const Trajectory& base,
                                        const CostSpec& cost, double tau);

struct ReducedGradient {
  Control grad_u;     // beta_u u + r 1_[0,tau], on the control's slab layout
  double dJ_dtau = 0;
};

ReducedGradient reduced_gradient(const Trajectory& base,
                                 const std::vector<AdjointState>& adj,
                                 const CostSpec& cost, double tau);

// Time level of tau on the trajectory grid; throws if tau is not a node.
long tau_level(const Trajectory& base, double tau);

}  // namespace cht
