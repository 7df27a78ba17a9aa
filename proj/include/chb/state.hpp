#pragma once

#include <optional>
#include <vector>

#include "chb/assembly.hpp"
#include "chb/linear_solver.hpp"
#include "chb/model.hpp"

namespace chb {

struct SolverOptions {
  double dt = 1e-2;
  double stabilization_S = 2.0;
  enum class Mode { stabilized_linear, newton } nonlinear_mode =
      Mode::stabilized_linear;
  int newton_max_iter = 30;
  double newton_tol = 1e-11;
  double linear_tol = 1e-10;
  bool velocity_enabled = true;
  double pressure_stab_factor = 0.1;  // gamma = factor * h^2 / eta
  bool upwind = false;

  void validate() const {
    require(dt > 0.0, ErrorKind::invalid_argument, "options: dt must be positive");
    require(linear_tol > 0.0 && linear_tol <= 1e-4, ErrorKind::invalid_argument,
            "options: linear_tol must lie in (0, 1e-4]");
    require(stabilization_S >= 0.0, ErrorKind::invalid_argument,
            "options: stabilization constant must be nonnegative");
  }

  double gamma_stab(const StructuredGrid& g, const ModelParams& p) const {
    double h = std::max(g.hx(), g.hy());
    return pressure_stab_factor * h * h / p.shear_eta;
  }
};

struct StateSnapshot {
  ScalarField phi, mu, sigma, pressure;
  VectorField2 vel;
};

struct SeriesRow {
  double t = 0, mass = 0, energy = 0, vel_l2 = 0, sigma_min = 0, sigma_max = 0,
         div_residual = 0;
};

struct Trajectory {
  GridPtr grid;
  double dt = 0;
  int n_steps = 0;
  std::vector<StateSnapshot> snaps;   // 0..n_steps
  std::vector<Vec> control;           // per-step control slices used
  std::vector<SeriesRow> series;
  double max_div_residual = 0.0;
};

/// -Lap sigma + h(phi) sigma = b (sigma_B - sigma); reaction terms are
/// mass-lumped so the operator is an M-matrix on moderate-aspect grids and
/// the discrete maximum principle holds.
SpMat nutrient_operator(const Discretization& d, const ModelParams& p,
                        const InterpolationH& h, const Vec& phi);

ScalarField solve_nutrient(const Discretization& d, const ScalarField& phi,
                           const ModelParams& p, const InterpolationH& h,
                           double linear_tol = 1e-10);

struct BrinkmanResult {
  VectorField2 vel;
  ScalarField pressure;
  double div_residual = 0.0;  // || div v - (P sigma - A) h(phi) ||_L2
};

/// Stabilized velocity-pressure solve with forcing (mu + chi sigma) grad phi
/// and divergence data (P sigma - A) h(phi).
BrinkmanResult solve_brinkman(const Discretization& d, const ScalarField& phi,
                              const ScalarField& mu, const ScalarField& sigma,
                              const ModelParams& p, const InterpolationH& h,
                              const SolverOptions& opts);

/// Operators reused across the steps of one trajectory (and across
/// trajectories on the same grid/options).
struct StepperOperators {
  SpMat ch_mat;
  std::optional<LinearSolver> ch_solver;        // stabilized_linear mode
  SpMat brinkman_mat;
  std::optional<LinearSolver> brinkman_solver;  // velocity_enabled

  static StepperOperators build(const Discretization& d, const ModelParams& p,
                                const SolverOptions& opts);
};

/// One Cahn-Hilliard step in mixed (phi, mu) form.  Both rows use the lumped
/// mass for zeroth-order terms; with that choice the stabilized splitting is
/// unconditionally energy-diminishing for S >= max psi'' on the range of phi.
std::pair<ScalarField, ScalarField> ch_step(
    const Discretization& d, const StepperOperators& ops,
    const ScalarField& phi_prev, const ScalarField& sigma_new,
    const VectorField2& vel_new, const Vec& u_slice, const ModelParams& p,
    const InterpolationH& h, const Potential& pot, const SolverOptions& opts);

/// Discrete phase-field energy 1/2 int |grad phi|^2 + int psi(phi) with the
/// nodal (lumped) quadrature the stepper is stable in.
double ch_energy(const Discretization& d, const Potential& pot,
                 const ScalarField& phi);

int steps_from(const ModelParams& p, const SolverOptions& opts);

/// Control-to-state map: per step, nutrient solve with the old phase field,
/// velocity-pressure solve (skipped in reduced mode), then the CH step.
/// u holds one control slice per step.
Trajectory solve_state(const Discretization& d, const std::vector<Vec>& u,
                       const ScalarField& phi0, const ModelParams& p,
                       const InterpolationH& h, const Potential& pot,
                       const SolverOptions& opts);

}  // namespace chb
