#include "chb/control.hpp"

#include <cmath>
#include <random>

namespace chb {

ControlField ControlField::zeros(GridPtr grid, double dt, int n_steps,
                                 double lower_bound, double upper_bound) {
  ControlField u;
  u.grid = std::move(grid);
  u.dt = dt;
  u.n_steps = n_steps;
  const int n = u.grid->num_nodes();
  u.values.assign(n_steps, Vec::Zero(n));
  u.lower.assign(n_steps, Vec::Constant(n, lower_bound));
  u.upper.assign(n_steps, Vec::Constant(n, upper_bound));
  u.validate();
  return u;
}

void ControlField::validate() const {
  require(grid != nullptr && n_steps >= 1 && dt > 0.0,
          ErrorKind::invalid_argument, "control: missing grid or time layout");
  require(int(values.size()) == n_steps && int(lower.size()) == n_steps &&
              int(upper.size()) == n_steps,
          ErrorKind::invalid_argument,
          "control: values and bounds need one slice per step");
  const int n = grid->num_nodes();
  for (int s = 0; s < n_steps; ++s) {
    require(values[s].size() == n && lower[s].size() == n &&
                upper[s].size() == n,
            ErrorKind::invalid_argument, "control: slice size mismatch");
    require((lower[s].array() <= upper[s].array()).all(),
            ErrorKind::bounds_violation,
            "control: lower bound exceeds upper bound");
  }
}

bool ControlField::in_box(double tol) const {
  for (int s = 0; s < n_steps; ++s) {
    if (((values[s] - lower[s]).array() < -tol).any()) return false;
    if (((values[s] - upper[s]).array() > tol).any()) return false;
  }
  return true;
}

void Objective::validate(int n_nodes, int n_levels) const {
  require(alpha0 >= 0.0 && alpha1 >= 0.0 && kappa >= 0.0 &&
              std::isfinite(alpha0) && std::isfinite(alpha1) &&
              std::isfinite(kappa),
          ErrorKind::invalid_argument,
          "objective: weights must be finite and nonnegative");
  if (alpha0 != 0.0)
    require(phi_f.size() == n_nodes, ErrorKind::invalid_argument,
            "objective: phi_f missing or of wrong size");
  if (alpha1 != 0.0) {
    require(int(phi_d.size()) == n_levels, ErrorKind::invalid_argument,
            "objective: phi_d needs one field per time level");
    for (const Vec& f : phi_d)
      require(f.size() == n_nodes, ErrorKind::invalid_argument,
              "objective: phi_d size mismatch");
  }
}

double control_inner(const Discretization& d, double dt,
                     const std::vector<Vec>& a, const std::vector<Vec>& b) {
  require(a.size() == b.size(), ErrorKind::invalid_argument,
          "control_inner: slice count mismatch");
  double acc = 0.0;
  for (size_t s = 0; s < a.size(); ++s)
    acc += dt * a[s].dot(d.Ml.cwiseProduct(b[s]));
  return acc;
}

double control_norm(const Discretization& d, double dt,
                    const std::vector<Vec>& a) {
  return std::sqrt(std::max(0.0, control_inner(d, dt, a, a)));
}

double trajectory_phi_norm(const Discretization& d,
                           const LinearizedSolution& s) {
  double acc = 0.0;
  for (int k = 0; k <= s.n_steps; ++k) {
    double w = (k == 0 || k == s.n_steps) ? 0.5 * s.dt : s.dt;
    acc += w * s.snaps[k].phi.v.dot(d.Ml.cwiseProduct(s.snaps[k].phi.v));
  }
  return std::sqrt(std::max(0.0, acc));
}

double cost(const Discretization& d, const ControlField& u,
            const Trajectory& base, const Objective& objective) {
  require_same_grid(d.grid, base.grid);
  require_same_grid(d.grid, u.grid);
  const int N = base.n_steps;
  objective.validate(d.n(), N + 1);
  double J = 0.0;
  if (objective.alpha0 != 0.0) {
    Vec e = base.snaps[N].phi.v - objective.phi_f;
    J += 0.5 * objective.alpha0 * e.dot(d.Ml.cwiseProduct(e));
  }
  if (objective.alpha1 != 0.0) {
    for (int k = 0; k <= N; ++k) {
      double w = (k == 0 || k == N) ? 0.5 * base.dt : base.dt;
      Vec e = base.snaps[k].phi.v - objective.phi_d[k];
      J += 0.5 * objective.alpha1 * w * e.dot(d.Ml.cwiseProduct(e));
    }
  }
  if (objective.kappa != 0.0)
    J += 0.5 * objective.kappa * control_inner(d, u.dt, u.values, u.values);
  return J;
}

std::vector<Vec> gradient(const TrajectoryLinearization& lin,
                          const ControlField& u,
                          const CostateTrajectory& costate, double kappa) {
  const int N = lin.n_steps();
  require(u.n_steps == N && int(costate.snaps.size()) == N + 1,
          ErrorKind::invalid_argument, "gradient: shape mismatch");
  std::vector<Vec> g(N);
  for (int s = 0; s < N; ++s) {
    g[s] = kappa * u.values[s] -
           lin.step(s).hphi.cwiseProduct(costate.snaps[s].phi_a.v);
  }
  return g;
}

Vec project_clamp(const Vec& s, const Vec& a, const Vec& b) {
  require(s.size() == a.size() && s.size() == b.size(),
          ErrorKind::invalid_argument, "project: size mismatch");
  require((a.array() <= b.array()).all(), ErrorKind::bounds_violation,
          "project: lower bound exceeds upper bound");
  return s.cwiseMax(a).cwiseMin(b);
}

ControlField project(const ControlField& u) {
  ControlField out = u;
  for (int s = 0; s < u.n_steps; ++s)
    out.values[s] = project_clamp(u.values[s], u.lower[s], u.upper[s]);
  return out;
}

double stationarity_residual(const Discretization& d, const ControlField& u,
                             const std::vector<Vec>& g, double gamma_probe) {
  require(gamma_probe > 0.0, ErrorKind::invalid_argument,
          "stationarity: probe step must be positive");
  require(int(g.size()) == u.n_steps, ErrorKind::invalid_argument,
          "stationarity: gradient shape mismatch");
  std::vector<Vec> diff(u.n_steps);
  for (int s = 0; s < u.n_steps; ++s)
    diff[s] = u.values[s] -
              project_clamp(u.values[s] - gamma_probe * g[s], u.lower[s],
                            u.upper[s]);
  double un = control_norm(d, u.dt, u.values);
  return control_norm(d, u.dt, diff) / std::max(1.0, un);
}

ReducedProblem::ReducedProblem(const Discretization& d, ModelParams params,
                               InterpolationH h, Potential pot,
                               SolverOptions opts, Objective objective,
                               ScalarField phi0)
    : d_(&d), params_(std::move(params)), h_(std::move(h)),
      pot_(std::move(pot)), opts_(opts), objective_(std::move(objective)),
      phi0_(std::move(phi0)) {
  opts_.validate();
  params_.validate();
  require_same_grid(d_->grid, phi0_.grid);
}

int ReducedProblem::n_steps() const { return steps_from(params_, opts_); }

Trajectory ReducedProblem::solve(const ControlField& u) const {
  require(u.n_steps == n_steps(), ErrorKind::invalid_argument,
          "reduced problem: control has wrong step count");
  return solve_state(*d_, u.values, phi0_, params_, h_, pot_, opts_);
}

double ReducedProblem::cost_of(const ControlField& u,
                               const Trajectory& base) const {
  return cost(*d_, u, base, objective_);
}

double ReducedProblem::cost_of(const ControlField& u) const {
  return cost_of(u, solve(u));
}

ReducedProblem::Evaluated ReducedProblem::evaluate(const ControlField& u) const {
  Evaluated ev;
  ev.base = solve(u);
  ev.lin = std::make_shared<TrajectoryLinearization>(*d_, ev.base, params_, h_,
                                                     pot_, opts_);
  ev.costate = solve_costate(*ev.lin, objective_);
  ev.grad = gradient(*ev.lin, u, ev.costate, objective_.kappa);
  ev.J = cost_of(u, ev.base);
  return ev;
}

PGResult projected_gradient(
    const ReducedProblem& problem, const ControlField& u0, const PGOptions& opts,
    const std::function<void(const PGHistoryRow&, const ControlField&)>&
        on_iterate) {
  require(opts.step0 > 0.0 && opts.shrink > 0.0 && opts.shrink < 1.0 &&
              opts.armijo_c > 0.0 && opts.armijo_c < 1.0,
          ErrorKind::invalid_argument, "optimizer: invalid line-search options");
  u0.validate();
  require(u0.in_box(), ErrorKind::bounds_violation,
          "optimizer: initial control violates its box");
  const Discretization& d = problem.disc();

  PGResult res;
  res.u = u0;
  ReducedProblem::Evaluated ev = problem.evaluate(res.u);
  double residual = stationarity_residual(d, res.u, ev.grad, 1.0);
  res.history.push_back({0, ev.J, residual, 0.0});
  if (on_iterate) on_iterate(res.history.back(), res.u);

  for (int it = 1; it <= opts.max_iter; ++it) {
    if (residual <= opts.stop_tol) {
      res.converged = true;
      break;
    }
    double gamma = opts.step0;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      ControlField trial = res.u;
      for (int s = 0; s < trial.n_steps; ++s)
        trial.values[s] = project_clamp(
            res.u.values[s] - gamma * ev.grad[s], res.u.lower[s],
            res.u.upper[s]);
      std::vector<Vec> step(trial.n_steps);
      for (int s = 0; s < trial.n_steps; ++s)
        step[s] = res.u.values[s] - trial.values[s];
      double decrease = control_inner(d, res.u.dt, ev.grad, step);
      if (decrease <= 0.0) {
        // projection removed all descent at this step length
        gamma *= opts.shrink;
        continue;
      }
      double Jt = problem.cost_of(trial);
      if (Jt <= ev.J - opts.armijo_c * decrease) {
        res.u = std::move(trial);
        ev = problem.evaluate(res.u);
        residual = stationarity_residual(d, res.u, ev.grad, 1.0);
        res.history.push_back({it, ev.J, residual, gamma});
        if (on_iterate) on_iterate(res.history.back(), res.u);
        accepted = true;
        break;
      }
      gamma *= opts.shrink;
    }
    if (!accepted) {
      if (residual <= opts.stop_tol * 10.0) {
        res.converged = true;
        break;
      }
      fail(ErrorKind::line_search_failure,
           "optimizer: Armijo search failed after " +
               std::to_string(opts.max_backtracks) + " shrinks");
    }
  }
  res.converged = res.converged || residual <= opts.stop_tol;
  res.final_cost = ev.J;
  res.final_residual = residual;
  res.final_gradient = ev.grad;
  return res;
}

double second_order_form(const ReducedProblem& problem,
                         const ReducedProblem::Evaluated& at,
                         const std::vector<Vec>& h_dir) {
  const Discretization& d = problem.disc();
  const TrajectoryLinearization& lin = *at.lin;
  LinearizedSolution dstate = frechet_state(lin, h_dir);
  CostateTrajectory dcostate =
      frechet_costate(lin, problem.objective(), h_dir, at.costate, dstate);
  const int N = lin.n_steps();
  double acc = problem.objective().kappa *
               control_inner(d, lin.dt(), h_dir, h_dir);
  for (int s = 0; s < N; ++s) {
    const auto& sc = lin.step(s);
    Vec h1(sc.hphi.size());
    for (Eigen::Index i = 0; i < h1.size(); ++i)
      h1[i] = problem.interpolation().eval(lin.base().snaps[s].phi.v[i], 1);
    Vec integrand =
        dcostate.snaps[s].phi_a.v.cwiseProduct(sc.hphi) +
        at.costate.snaps[s].phi_a.v.cwiseProduct(h1).cwiseProduct(
            dstate.snaps[s].phi.v);
    acc -= lin.dt() * integrand.dot(d.Ml.cwiseProduct(h_dir[s]));
  }
  return acc;
}

std::vector<Vec> critical_cone_filter(const ControlField& u,
                                      const std::vector<Vec>& g,
                                      const std::vector<Vec>& h_dir,
                                      double tol_active, double tol_grad) {
  require(int(g.size()) == u.n_steps && int(h_dir.size()) == u.n_steps,
          ErrorKind::invalid_argument, "cone filter: shape mismatch");
  std::vector<Vec> out(u.n_steps);
  for (int s = 0; s < u.n_steps; ++s) {
    out[s] = h_dir[s];
    for (Eigen::Index i = 0; i < out[s].size(); ++i) {
      if (std::abs(g[s][i]) > tol_grad) {
        out[s][i] = 0.0;
        continue;
      }
      if (std::abs(u.values[s][i] - u.lower[s][i]) <= tol_active)
        out[s][i] = std::max(out[s][i], 0.0);
      if (std::abs(u.values[s][i] - u.upper[s][i]) <= tol_active)
        out[s][i] = std::min(out[s][i], 0.0);
    }
  }
  return out;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 step on seed ^ golden-ratio-multiplied index
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SecondOrderReport check_second_order(const ReducedProblem& problem,
                                     const ReducedProblem::Evaluated& at,
                                     const ControlField& u, int n_samples,
                                     std::uint64_t seed) {
  require(n_samples >= 1, ErrorKind::invalid_argument,
          "check_second_order: need at least one sample");
  const Discretization& d = problem.disc();
  const int n = d.n();
  SecondOrderReport rep;
  rep.n_samples = n_samples;
  rep.seed = seed;

  // active-set tolerances scale with the data; exact equalities are
  // meaningless in floating point
  double gap = 0.0, gmax = 0.0;
  for (int s = 0; s < u.n_steps; ++s) {
    gap = std::max(gap, (u.upper[s] - u.lower[s]).cwiseAbs().maxCoeff());
    gmax = std::max(gmax, at.grad[s].cwiseAbs().maxCoeff());
  }
  const double tol_active = 1e-6 * std::max(gap, 1e-30);
  const double tol_grad = 1e-6 * std::max(gmax, 1e-30);

  bool any = false;
  for (int sample = 0; sample < n_samples; ++sample) {
    std::mt19937_64 rng(split_seed(seed, sample));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Vec> h(u.n_steps);
    for (int s = 0; s < u.n_steps; ++s) {
      h[s].resize(n);
      for (int i = 0; i < n; ++i) h[s][i] = uni(rng);
    }
    h = critical_cone_filter(u, at.grad, h, tol_active, tol_grad);
    double hn = control_norm(d, u.dt, h);
    if (hn < 1e-14) {
      ++rep.n_trivial;
      continue;
    }
    double v = second_order_form(problem, at, h);
    rep.values.push_back(v);
    rep.min_value = any ? std::min(rep.min_value, v) : v;
    any = true;
    if (v <= 0.0) rep.all_positive = false;
  }
  rep.cone_trivial = !any;
  return rep;
}

}  // namespace chb
