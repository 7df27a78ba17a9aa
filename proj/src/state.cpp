#include "chb/state.hpp"

#include <cmath>

namespace chb {

namespace {

using Triplet = Eigen::Triplet<double>;

Vec nodal_apply(const InterpolationH& h, const Vec& phi, int order) {
  Vec out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) out[i] = h.eval(phi[i], order);
  return out;
}

Vec nodal_psi(const Potential& pot, const Vec& phi, int order) {
  Vec out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) out[i] = pot.eval(phi[i], order);
  return out;
}

SpMat ch_block_matrix(const Discretization& d, const ModelParams& p,
                      const SolverOptions& opts) {
  const int n = d.n();
  std::vector<Triplet> t;
  t.reserve(2 * size_t(d.K.nonZeros()) + 3 * size_t(n));
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, d.Ml[i]);
    t.emplace_back(n + i, n + i, d.Ml[i]);
    t.emplace_back(n + i, i, -opts.stabilization_S * d.Ml[i]);
  }
  for (int k = 0; k < d.K.outerSize(); ++k)
    for (SpMat::InnerIterator it(d.K, k); it; ++it) {
      t.emplace_back(int(it.row()), n + int(it.col()),
                     opts.dt * p.mobility_m * it.value());
      t.emplace_back(n + int(it.row()), int(it.col()), -it.value());
    }
  SpMat m(2 * n, 2 * n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SpMat nutrient_operator(const Discretization& d, const ModelParams& p,
                        const InterpolationH& h, const Vec& phi) {
  const int n = d.n();
  Vec hphi = nodal_apply(h, phi, 0);
  SpMat A = d.K;
  std::vector<Triplet> t;
  t.reserve(size_t(A.nonZeros()) + size_t(n));
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      t.emplace_back(int(it.row()), int(it.col()), it.value());
  for (int i = 0; i < n; ++i)
    t.emplace_back(i, i, d.Ml[i] * (hphi[i] + p.nutrient_b));
  SpMat out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

ScalarField solve_nutrient(const Discretization& d, const ScalarField& phi,
                           const ModelParams& p, const InterpolationH& h,
                           double linear_tol) {
  require_same_grid(d.grid, phi.grid);
  require(phi.finite(), ErrorKind::invalid_argument, "nutrient: phi not finite");
  require(p.sigma_B.grid != nullptr, ErrorKind::invalid_argument,
          "nutrient: sigma_B not configured");
  require_same_grid(d.grid, p.sigma_B.grid);
  SpMat A = nutrient_operator(d, p, h, phi.v);
  LinearSolver solver(std::move(A), LinearSolver::Kind::spd, linear_tol);
  Vec rhs = p.nutrient_b * d.Ml.cwiseProduct(p.sigma_B.v);
  return ScalarField(d.grid, solver.solve(rhs));
}

StepperOperators StepperOperators::build(const Discretization& d,
                                         const ModelParams& p,
                                         const SolverOptions& opts) {
  StepperOperators ops;
  if (opts.nonlinear_mode == SolverOptions::Mode::stabilized_linear) {
    ops.ch_mat = ch_block_matrix(d, p, opts);
    ops.ch_solver.emplace(ops.ch_mat, LinearSolver::Kind::general,
                          opts.linear_tol);
  }
  if (opts.velocity_enabled) {
    ops.brinkman_mat =
        assemble_brinkman_operator(d, p, opts.gamma_stab(*d.grid, p));
    ops.brinkman_solver.emplace(ops.brinkman_mat, LinearSolver::Kind::general,
                                opts.linear_tol);
  }
  return ops;
}

namespace {

BrinkmanResult brinkman_with(const Discretization& d, const LinearSolver& solver,
                             const ScalarField& phi, const ScalarField& mu,
                             const ScalarField& sigma, const ModelParams& p,
                             const InterpolationH& h) {
  const int n = d.n();
  Vec coef = mu.v + p.chemotaxis_chi * sigma.v;
  Vec g = (p.proliferation_P * sigma.v.array() - p.apoptosis_A).matrix();
  Vec hphi = nodal_apply(h, phi.v, 0);
  g = g.cwiseProduct(hphi);

  Vec rhs(3 * n);
  rhs.head(2 * n) = load_coeff_grad(d, coef, phi.v);
  rhs.tail(n) = d.M * g;
  Vec sol = solver.solve(rhs);

  BrinkmanResult out;
  out.vel = VectorField2(d.grid, sol.head(2 * n));
  out.pressure = ScalarField(d.grid, sol.tail(n));
  out.div_residual = divergence_residual_l2(d, out.vel.v, g);
  return out;
}

}  // namespace

BrinkmanResult solve_brinkman(const Discretization& d, const ScalarField& phi,
                              const ScalarField& mu, const ScalarField& sigma,
                              const ModelParams& p, const InterpolationH& h,
                              const SolverOptions& opts) {
  require_same_grid(phi.grid, mu.grid);
  require_same_grid(phi.grid, sigma.grid);
  require_same_grid(d.grid, phi.grid);
  SpMat B = assemble_brinkman_operator(d, p, opts.gamma_stab(*d.grid, p));
  LinearSolver solver(std::move(B), LinearSolver::Kind::general, opts.linear_tol);
  return brinkman_with(d, solver, phi, mu, sigma, p, h);
}

std::pair<ScalarField, ScalarField> ch_step(
    const Discretization& d, const StepperOperators& ops,
    const ScalarField& phi_prev, const ScalarField& sigma_new,
    const VectorField2& vel_new, const Vec& u_slice, const ModelParams& p,
    const InterpolationH& h, const Potential& pot, const SolverOptions& opts) {
  const int n = d.n();
  const double dt = opts.dt;
  const Vec& phi = phi_prev.v;

  Vec hphi = nodal_apply(h, phi, 0);
  Vec source = (p.proliferation_P * sigma_new.v.array() - p.apoptosis_A -
                u_slice.array())
                   .matrix()
                   .cwiseProduct(hphi);

  Vec transport = Vec::Zero(n);
  if (opts.velocity_enabled) {
    SpMat T = assemble_conv_phi(d, vel_new.v);
    transport = T * phi;
    if (opts.upwind) {
      // first-order artificial diffusion, coefficient frozen at |v|
      const double he = std::max(d.grid->hx(), d.grid->hy());
      double vmax = 0.0;
      for (int i = 0; i < n; ++i)
        vmax = std::max(vmax, std::hypot(vel_new.v[i], vel_new.v[n + i]));
      transport += 0.5 * he * vmax * (d.K * phi);
    }
  }

  if (opts.nonlinear_mode == SolverOptions::Mode::stabilized_linear) {
    Vec rhs(2 * n);
    rhs.head(n) = d.Ml.cwiseProduct(phi) - dt * transport +
                  dt * d.Ml.cwiseProduct(source);
    rhs.tail(n) = d.Ml.cwiseProduct(nodal_psi(pot, phi, 1) -
                                    opts.stabilization_S * phi -
                                    p.chemotaxis_chi * sigma_new.v);
    Vec sol = ops.ch_solver->solve(rhs);
    return {ScalarField(d.grid, sol.head(n)), ScalarField(d.grid, sol.tail(n))};
  }

  // Newton mode: psi'(phi^{n+1}) implicit.
  Vec phi_new = phi;
  Vec mu_new = Vec::Zero(n);
  Vec rhs_phi = d.Ml.cwiseProduct(phi) - dt * transport +
                dt * d.Ml.cwiseProduct(source);
  const double scale = std::max(1.0, rhs_phi.norm());
  for (int it = 0; it < opts.newton_max_iter; ++it) {
    Vec g1 = d.Ml.cwiseProduct(phi_new) + dt * p.mobility_m * (d.K * mu_new) -
             rhs_phi;
    Vec g2 = d.Ml.cwiseProduct(mu_new) - d.K * phi_new -
             d.Ml.cwiseProduct(nodal_psi(pot, phi_new, 1)) +
             p.chemotaxis_chi * d.Ml.cwiseProduct(sigma_new.v);
    double res = std::sqrt(g1.squaredNorm() + g2.squaredNorm()) / scale;
    if (res <= opts.newton_tol) {
      return {ScalarField(d.grid, phi_new), ScalarField(d.grid, mu_new)};
    }
    Vec psi2 = nodal_psi(pot, phi_new, 2);
    std::vector<Triplet> t;
    t.reserve(2 * size_t(d.K.nonZeros()) + 2 * size_t(n));
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, d.Ml[i]);
      t.emplace_back(n + i, n + i, d.Ml[i]);
      t.emplace_back(n + i, i, -d.Ml[i] * psi2[i]);
    }
    for (int k = 0; k < d.K.outerSize(); ++k)
      for (SpMat::InnerIterator kit(d.K, k); kit; ++kit) {
        t.emplace_back(int(kit.row()), n + int(kit.col()),
                       dt * p.mobility_m * kit.value());
        t.emplace_back(n + int(kit.row()), int(kit.col()), -kit.value());
      }
    SpMat J(2 * n, 2 * n);
    J.setFromTriplets(t.begin(), t.end());
    LinearSolver newton(std::move(J), LinearSolver::Kind::general,
                        opts.linear_tol);
    Vec g(2 * n);
    g.head(n) = g1;
    g.tail(n) = g2;
    Vec dz = newton.solve(g);
    phi_new -= dz.head(n);
    mu_new -= dz.tail(n);
  }
  fail(ErrorKind::newton_divergence, "ch_step: Newton iteration did not converge");
}

double ch_energy(const Discretization& d, const Potential& pot,
                 const ScalarField& phi) {
  Vec psi = nodal_psi(pot, phi.v, 0);
  return 0.5 * phi.v.dot(d.K * phi.v) + d.Ml.dot(psi);
}

int steps_from(const ModelParams& p, const SolverOptions& opts) {
  int n = int(std::lround(p.final_time_T / opts.dt));
  require(n >= 1 && std::abs(p.final_time_T - n * opts.dt) <=
                        1e-9 * std::max(1.0, p.final_time_T),
          ErrorKind::invalid_argument,
          "options: final time must be an integer multiple of dt");
  return n;
}

Trajectory solve_state(const Discretization& d, const std::vector<Vec>& u,
                       const ScalarField& phi0, const ModelParams& p,
                       const InterpolationH& h, const Potential& pot,
                       const SolverOptions& opts) {
  opts.validate();
  p.validate();
  require_same_grid(d.grid, phi0.grid);
  require(phi0.finite(), ErrorKind::invalid_argument, "solve_state: phi0 not finite");
  const int n = d.n();
  const int n_steps = steps_from(p, opts);
  require(int(u.size()) == n_steps, ErrorKind::invalid_argument,
          "solve_state: control must have one slice per step");
  for (const Vec& s : u)
    require(s.size() == n, ErrorKind::invalid_argument,
            "solve_state: control slice size mismatch");

  StepperOperators ops = StepperOperators::build(d, p, opts);

  Trajectory traj;
  traj.grid = d.grid;
  traj.dt = opts.dt;
  traj.n_steps = n_steps;
  traj.control = u;
  traj.snaps.reserve(n_steps + 1);

  auto make_snapshot = [&](ScalarField phi, ScalarField mu, ScalarField sigma,
                           VectorField2 vel, ScalarField pr) {
    StateSnapshot s;
    s.phi = std::move(phi);
    s.mu = std::move(mu);
    s.sigma = std::move(sigma);
    s.vel = std::move(vel);
    s.pressure = std::move(pr);
    return s;
  };

  auto push_series = [&](double t, const StateSnapshot& s, double div_res) {
    SeriesRow row;
    row.t = t;
    row.mass = integrate_nodal(d, s.phi.v);
    row.energy = ch_energy(d, pot, s.phi);
    row.vel_l2 = norm_vector(d, s.vel, NormKind::L2);
    row.sigma_min = s.sigma.v.minCoeff();
    row.sigma_max = s.sigma.v.maxCoeff();
    row.div_residual = div_res;
    traj.series.push_back(row);
    traj.max_div_residual = std::max(traj.max_div_residual, div_res);
  };

  // Initial snapshot: nutrient and velocity consistent with phi0; mu from
  // the chemical-potential relation without stabilization shift.
  ScalarField sigma0 = solve_nutrient(d, phi0, p, h, opts.linear_tol);
  Vec mu0 = (d.K * phi0.v).cwiseQuotient(d.Ml);
  for (int i = 0; i < n; ++i)
    mu0[i] += pot.eval(phi0.v[i], 1) - p.chemotaxis_chi * sigma0.v[i];
  ScalarField mu0f(d.grid, mu0);
  VectorField2 v0(d.grid);
  ScalarField p0(d.grid);
  double div0 = 0.0;
  if (opts.velocity_enabled) {
    BrinkmanResult b =
        brinkman_with(d, *ops.brinkman_solver, phi0, mu0f, sigma0, p, h);
    v0 = std::move(b.vel);
    p0 = std::move(b.pressure);
    div0 = b.div_residual;
  }
  traj.snaps.push_back(make_snapshot(phi0, mu0f, sigma0, v0, p0));
  push_series(0.0, traj.snaps.back(), div0);

  for (int step = 0; step < n_steps; ++step) {
    try {
      const StateSnapshot& prev = traj.snaps.back();
      ScalarField sigma = solve_nutrient(d, prev.phi, p, h, opts.linear_tol);
      VectorField2 vel(d.grid);
      ScalarField pr(d.grid);
      double div_res = 0.0;
      if (opts.velocity_enabled) {
        BrinkmanResult b = brinkman_with(d, *ops.brinkman_solver, prev.phi,
                                         prev.mu, sigma, p, h);
        vel = std::move(b.vel);
        pr = std::move(b.pressure);
        div_res = b.div_residual;
      }
      auto [phi, mu] =
          ch_step(d, ops, prev.phi, sigma, vel, u[step], p, h, pot, opts);
      require(phi.finite() && mu.finite(), ErrorKind::solver_divergence,
              "solve_state: non-finite fields");
      traj.snaps.push_back(make_snapshot(std::move(phi), std::move(mu),
                                         std::move(sigma), std::move(vel),
                                         std::move(pr)));
      push_series((step + 1) * opts.dt, traj.snaps.back(), div_res);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " [at step " +
                                std::to_string(step + 1) + "]");
    }
  }
  return traj;
}

}  // namespace chb
