#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "chb/adjoint.hpp"

namespace chb {

/// Discrete L2(L2) inner product of per-step slices (lumped mass in space,
/// piecewise-constant quadrature in time).
double control_inner(const Discretization& d, double dt,
                     const std::vector<Vec>& a, const std::vector<Vec>& b);
double control_norm(const Discretization& d, double dt,
                    const std::vector<Vec>& a);

/// Trajectory-field L2(L2) norm with trapezoidal time weights.
double trajectory_phi_norm(const Discretization& d,
                           const LinearizedSolution& s);

/// Tracking cost alpha0/2 |phi(T)-phi_f|^2 + alpha1/2 |phi-phi_d|^2_{L2(L2)}
/// + kappa/2 |u|^2_{L2(L2)}.
double cost(const Discretization& d, const ControlField& u,
            const Trajectory& base, const Objective& objective);

/// Riesz representative of the cost derivative: g = kappa u - phi_a h(phi),
/// nodal per step.
std::vector<Vec> gradient(const TrajectoryLinearization& lin,
                          const ControlField& u,
                          const CostateTrajectory& costate, double kappa);

/// Nodal clamp to [a, b]; rejects bounds with a > b anywhere.
Vec project_clamp(const Vec& s, const Vec& a, const Vec& b);
ControlField project(const ControlField& u);

/// ||u - P(u - gamma g)|| / max(1, ||u||) in the control norm.
double stationarity_residual(const Discretization& d, const ControlField& u,
                             const std::vector<Vec>& g, double gamma_probe);

/// Bundles grid, model and objective so that the optimizer and the
/// certificate evaluators can re-solve states and costates for arbitrary
/// admissible controls.
class ReducedProblem {
 public:
  ReducedProblem(const Discretization& d, ModelParams params,
                 InterpolationH h, Potential pot, SolverOptions opts,
                 Objective objective, ScalarField phi0);

  struct Evaluated {
    Trajectory base;
    std::shared_ptr<TrajectoryLinearization> lin;
    CostateTrajectory costate;
    std::vector<Vec> grad;
    double J = 0.0;
  };

  Trajectory solve(const ControlField& u) const;
  double cost_of(const ControlField& u, const Trajectory& base) const;
  double cost_of(const ControlField& u) const;
  Evaluated evaluate(const ControlField& u) const;

  const Discretization& disc() const { return *d_; }
  const ModelParams& params() const { return params_; }
  const InterpolationH& interpolation() const { return h_; }
  const Potential& potential() const { return pot_; }
  const SolverOptions& options() const { return opts_; }
  const Objective& objective() const { return objective_; }
  const ScalarField& phi0() const { return phi0_; }
  int n_steps() const;

 private:
  const Discretization* d_;
  ModelParams params_;
  InterpolationH h_;
  Potential pot_;
  SolverOptions opts_;
  Objective objective_;
  ScalarField phi0_;
};

struct PGOptions {
  double step0 = 1.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_iter = 50;
  double stop_tol = 1e-6;
  int max_backtracks = 50;
};

struct PGHistoryRow {
  int iter = 0;
  double cost = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct PGResult {
  ControlField u;
  std::vector<PGHistoryRow> history;
  bool converged = false;
  double final_cost = 0.0;
  double final_residual = 0.0;
  std::vector<Vec> final_gradient;
};

/// Projected gradient with Armijo backtracking along the projected path;
/// every iterate stays inside the box, and accepted steps never increase
/// the cost.  An optional per-iteration callback supports checkpointing.
PGResult projected_gradient(
    const ReducedProblem& problem, const ControlField& u0, const PGOptions& opts,
    const std::function<void(const PGHistoryRow&, const ControlField&)>&
        on_iterate = nullptr);

/// Curvature form kappa <h,h> - int (phi_a'[h] h(phi) + phi_a h'(phi)
/// phi'[h]) h evaluated through the directional state and costate solves.
double second_order_form(const ReducedProblem& problem,
                         const ReducedProblem::Evaluated& at,
                         const std::vector<Vec>& h_dir);

/// Restrict a direction to the critical cone at u: h >= 0 on the active
/// lower set, h <= 0 on the active upper set, h = 0 where the gradient is
/// decisively nonzero.
std::vector<Vec> critical_cone_filter(const ControlField& u,
                                      const std::vector<Vec>& g,
                                      const std::vector<Vec>& h_dir,
                                      double tol_active, double tol_grad);

struct SecondOrderReport {
  int n_samples = 0;
  int n_trivial = 0;        // directions filtered to zero
  bool cone_trivial = false;  // every sampled direction was filtered away
  bool all_positive = true;   // meaningful only when !cone_trivial
  double min_value = 0.0;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

/// Sampled second-order check over critical-cone directions.  Evidence, not
/// proof; the report marks directions that the cone filter annihilated.
SecondOrderReport check_second_order(const ReducedProblem& problem,
                                     const ReducedProblem::Evaluated& at,
                                     const ControlField& u, int n_samples,
                                     std::uint64_t seed);

/// Deterministic per-index RNG stream (splittable by construction).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace chb
