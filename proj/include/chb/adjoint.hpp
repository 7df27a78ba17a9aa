#pragma once

#include "chb/linearized.hpp"
#include "chb/objective.hpp"

namespace chb {

/// Data of the general adjoint-type system.  G0 is the terminal datum for
/// the adjoint phase field; G1 (phase equation), G2 (tau relation), G3 (rho
/// equation), Gvec1 (adjoint momentum) and Gvec2 (gradient-weighted phase
/// source) are per time level 0..n_steps; the level-0 entries never couple.
/// Empty containers mean zero.
struct AdjointRHS {
  Vec G0;
  std::vector<Vec> G1, G2, G3;
  std::vector<Vec> Gvec1, Gvec2;  // size 2n per level
};

struct CostateSnapshot {
  ScalarField phi_a;  // adjoint phase field
  ScalarField tau;    // adjoint chemical potential
  ScalarField rho;    // adjoint nutrient
  VectorField2 w;     // adjoint velocity (weakly divergence-free)
  ScalarField q;      // adjoint pressure
};

struct CostateTrajectory {
  GridPtr grid;
  double dt = 0;
  int n_steps = 0;
  std::vector<CostateSnapshot> snaps;  // 0..n_steps
};

/// Backward sweep: per step the transposed CH block, the transposed
/// velocity-pressure block and the (symmetric) nutrient operator are solved
/// with frozen forward coefficients; the terminal datum G0 is injected
/// through the lumped mass.  The sweep is the exact transpose of the
/// linearized forward sweep.
CostateTrajectory solve_adjoint_general(const TrajectoryLinearization& lin,
                                        const AdjointRHS& rhs);

/// Costate of the tracking objective: G0 = alpha0 (phi(T) - phi_f),
/// G1 = alpha1 (phi - phi_d), everything else zero.
CostateTrajectory solve_costate(const TrajectoryLinearization& lin,
                                const Objective& objective);

/// Directional derivative of the control-to-costate map, assembled from the
/// base state, its costate and the directional state derivative; solved
/// through the general system with the pressure-shift reformulation
/// q = pi + phi'[h] phi_a.
CostateTrajectory frechet_costate(const TrajectoryLinearization& lin,
                                  const Objective& objective,
                                  const std::vector<Vec>& h_dir,
                                  const CostateTrajectory& costate,
                                  const LinearizedSolution& lin_state);

/// Both sides of the forward/adjoint pairing identity, for verification:
/// <solution, G-data> must equal <costate, F-data> to solver tolerance.
double duality_pairing_solution(const TrajectoryLinearization& lin,
                                const LinearizedSolution& sol,
                                const AdjointRHS& g);
double duality_pairing_costate(const TrajectoryLinearization& lin,
                               const CostateTrajectory& costate,
                               const LinearizedRHS& f,
                               const std::vector<Vec>* du = nullptr);

}  // namespace chb
