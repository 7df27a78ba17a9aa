#pragma once

#include <optional>

#include "chb/state.hpp"

namespace chb {

/// Right-hand-side data of the general linearized system, one field per time
/// level 1..n_steps (index 0 unused).  Empty containers mean zero.  F1 feeds
/// the divergence constraint, Fvec the momentum equation, F2 the phase
/// equation, F3 the chemical-potential relation, F4 the nutrient equation.
struct LinearizedRHS {
  std::vector<Vec> F1, F2, F3, F4;
  std::vector<Vec> Fvec;  // size 2n per level
};

/// Solution of the linearized system; same shape as a Trajectory with zero
/// initial phase field.
struct LinearizedSolution {
  GridPtr grid;
  double dt = 0;
  int n_steps = 0;
  std::vector<StateSnapshot> snaps;
};

/// Frozen linearization of the forward scheme around a base trajectory.
/// The discrete linearization is the exact derivative of the discrete step
/// map (stabilized_linear mode), so the transposed sweep below is the exact
/// discrete adjoint and forward/adjoint duality holds to solver tolerance.
///
/// Per-step nodal coefficients are cached; the sparse coupling matrices are
/// reassembled on demand (deterministically, so repeated applications agree
/// bit for bit).  A frozen base is read-only: directional solves against it
/// may run concurrently.
class TrajectoryLinearization {
 public:
  TrajectoryLinearization(const Discretization& d, const Trajectory& base,
                          const ModelParams& p, const InterpolationH& h,
                          const Potential& pot, const SolverOptions& opts);

  LinearizedSolution forward(const LinearizedRHS& rhs,
                             const std::vector<Vec>* du = nullptr) const;

  int n_steps() const { return n_steps_; }
  double dt() const { return opts_.dt; }
  const Discretization& disc() const { return *disc_; }
  const Trajectory& base() const { return *base_; }
  const ModelParams& params() const { return params_; }
  const InterpolationH& interpolation() const { return h_; }
  const Potential& potential() const { return pot_; }
  const SolverOptions& options() const { return opts_; }

  struct StepCoefficients {
    Vec hphi;           // h(phi_n)
    Vec psi2;           // psi''(phi_n)
    Vec src_dphi;       // (P sigma_{n+1} - A - u_n) h'(phi_n)
    Vec src_dsig;       // P h(phi_n)
    Vec nutrient_dphi;  // Ml h'(phi_n) sigma_{n+1}
    Vec gphi_coeff;     // (P sigma_{n+1} - A) h'(phi_n)
    double upwind_coeff = 0.0;
  };
  const StepCoefficients& step(int n) const { return steps_[n]; }

  SpMat step_nutrient_operator(int n) const;
  SpMat step_conv_phi(int n) const;      // n x n
  SpMat step_conv_vel(int n) const;      // n x 2n
  SpMat step_force_mu(int n) const;      // 2n x n
  SpMat step_force_phi(int n) const;     // 2n x n

  const LinearSolver& ch_solver() const { return *ch_solver_; }
  const LinearSolver& ch_solver_transposed() const { return *ch_solver_t_; }
  const LinearSolver* brinkman_solver() const {
    return brk_solver_ ? &*brk_solver_ : nullptr;
  }
  const LinearSolver* brinkman_solver_transposed() const {
    return brk_solver_t_ ? &*brk_solver_t_ : nullptr;
  }

  /// Trapezoidal weight of time level k.
  double level_weight(int k) const {
    return (k == 0 || k == n_steps_) ? 0.5 * opts_.dt : opts_.dt;
  }

 private:
  const Discretization* disc_;
  const Trajectory* base_;
  ModelParams params_;
  InterpolationH h_;
  Potential pot_;
  SolverOptions opts_;
  int n_steps_;
  std::vector<StepCoefficients> steps_;
  SpMat ch_mat_, ch_mat_t_, brk_mat_, brk_mat_t_;
  std::optional<LinearSolver> ch_solver_, ch_solver_t_;
  std::optional<LinearSolver> brk_solver_, brk_solver_t_;
};

/// Solves the linearized system around the given base with general data.
LinearizedSolution solve_linearized(const TrajectoryLinearization& lin,
                                    const LinearizedRHS& rhs);

/// Directional state derivative: the linearized system driven by the control
/// direction alone (phase-equation data -h_dir h(phi)).
LinearizedSolution frechet_state(const TrajectoryLinearization& lin,
                                 const std::vector<Vec>& h_dir);

}  // namespace chb
