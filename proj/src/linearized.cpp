#include "chb/linearized.hpp"

#include <cmath>

namespace chb {

namespace {

Vec nodal_apply(const InterpolationH& h, const Vec& phi, int order) {
  Vec out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) out[i] = h.eval(phi[i], order);
  return out;
}

const Vec* level_or_null(const std::vector<Vec>& arr, int k) {
  if (arr.empty()) return nullptr;
  if (k < 0 || k >= int(arr.size())) return nullptr;
  if (arr[k].size() == 0) return nullptr;
  return &arr[k];
}

}  // namespace

TrajectoryLinearization::TrajectoryLinearization(
    const Discretization& d, const Trajectory& base, const ModelParams& p,
    const InterpolationH& h, const Potential& pot, const SolverOptions& opts)
    : disc_(&d), base_(&base), params_(p), h_(h), pot_(pot), opts_(opts),
      n_steps_(base.n_steps) {
  require(opts_.nonlinear_mode == SolverOptions::Mode::stabilized_linear,
          ErrorKind::unsupported,
          "linearization: only the stabilized_linear scheme is differentiated");
  require(int(base.snaps.size()) == n_steps_ + 1 &&
              int(base.control.size()) == n_steps_,
          ErrorKind::invalid_argument, "linearization: incomplete trajectory");
  require_same_grid(d.grid, base.grid);

  const int n = d.n();
  steps_.resize(n_steps_);
  for (int s = 0; s < n_steps_; ++s) {
    const Vec& phi = base.snaps[s].phi.v;
    const Vec& sig = base.snaps[s + 1].sigma.v;
    const Vec& u = base.control[s];
    StepCoefficients& c = steps_[s];
    c.hphi = nodal_apply(h_, phi, 0);
    c.psi2.resize(n);
    for (int i = 0; i < n; ++i) c.psi2[i] = pot_.eval(phi[i], 2);
    Vec hp = nodal_apply(h_, phi, 1);
    c.src_dsig = params_.proliferation_P * c.hphi;
    c.gphi_coeff =
        (params_.proliferation_P * sig.array() - params_.apoptosis_A)
            .matrix()
            .cwiseProduct(hp);
    c.src_dphi = c.gphi_coeff - u.cwiseProduct(hp);
    c.nutrient_dphi = d.Ml.cwiseProduct(hp).cwiseProduct(sig);
    if (opts_.upwind && opts_.velocity_enabled) {
      const Vec& vel = base.snaps[s + 1].vel.v;
      double vmax = 0.0;
      for (int i = 0; i < n; ++i)
        vmax = std::max(vmax, std::hypot(vel[i], vel[n + i]));
      c.upwind_coeff = 0.5 * std::max(d.grid->hx(), d.grid->hy()) * vmax;
    }
  }

  ch_mat_ = StepperOperators::build(d, params_, opts_).ch_mat;
  ch_mat_t_ = SpMat(ch_mat_.transpose());
  ch_solver_.emplace(ch_mat_, LinearSolver::Kind::general, opts_.linear_tol);
  ch_solver_t_.emplace(ch_mat_t_, LinearSolver::Kind::general, opts_.linear_tol);
  if (opts_.velocity_enabled) {
    brk_mat_ = assemble_brinkman_operator(d, params_,
                                          opts_.gamma_stab(*d.grid, params_));
    brk_mat_t_ = SpMat(brk_mat_.transpose());
    brk_solver_.emplace(brk_mat_, LinearSolver::Kind::general, opts_.linear_tol);
    brk_solver_t_.emplace(brk_mat_t_, LinearSolver::Kind::general,
                          opts_.linear_tol);
  }
}

SpMat TrajectoryLinearization::step_nutrient_operator(int s) const {
  return nutrient_operator(*disc_, params_, h_, base_->snaps[s].phi.v);
}

SpMat TrajectoryLinearization::step_conv_phi(int s) const {
  SpMat T = assemble_conv_phi(*disc_, base_->snaps[s + 1].vel.v);
  if (steps_[s].upwind_coeff > 0.0) T += steps_[s].upwind_coeff * disc_->K;
  return T;
}

SpMat TrajectoryLinearization::step_conv_vel(int s) const {
  return assemble_conv_vel(*disc_, base_->snaps[s].phi.v);
}

SpMat TrajectoryLinearization::step_force_mu(int s) const {
  return assemble_force_coeff_mu(*disc_, base_->snaps[s].phi.v);
}

SpMat TrajectoryLinearization::step_force_phi(int s) const {
  Vec coef = base_->snaps[s].mu.v +
             params_.chemotaxis_chi * base_->snaps[s + 1].sigma.v;
  return assemble_force_coeff_phi(*disc_, coef);
}

LinearizedSolution TrajectoryLinearization::forward(
    const LinearizedRHS& rhs, const std::vector<Vec>* du) const {
  const Discretization& d = *disc_;
  const int n = d.n();
  const double dt = opts_.dt;
  const double chi = params_.chemotaxis_chi;

  LinearizedSolution out;
  out.grid = d.grid;
  out.dt = dt;
  out.n_steps = n_steps_;
  out.snaps.resize(n_steps_ + 1);
  auto zero_snap = [&]() {
    StateSnapshot s;
    s.phi = ScalarField(d.grid);
    s.mu = ScalarField(d.grid);
    s.sigma = ScalarField(d.grid);
    s.pressure = ScalarField(d.grid);
    s.vel = VectorField2(d.grid);
    return s;
  };
  out.snaps[0] = zero_snap();

  Vec dphi = Vec::Zero(n), dmu = Vec::Zero(n);
  for (int s = 0; s < n_steps_; ++s) {
    const int k = s + 1;
    const StepCoefficients& sc = steps_[s];

    LinearSolver nut(step_nutrient_operator(s), LinearSolver::Kind::spd,
                     opts_.linear_tol);
    Vec rhs_sig = -sc.nutrient_dphi.cwiseProduct(dphi);
    if (const Vec* f4 = level_or_null(rhs.F4, k))
      rhs_sig += d.Ml.cwiseProduct(*f4);
    Vec dsig = nut.solve(rhs_sig);

    Vec dv = Vec::Zero(2 * n), dp = Vec::Zero(n);
    if (opts_.velocity_enabled) {
      Vec rv(3 * n);
      rv.head(2 * n) = step_force_mu(s) * (dmu + chi * dsig) +
                       step_force_phi(s) * dphi;
      if (const Vec* fv = level_or_null(rhs.Fvec, k))
        rv.head(2 * n) += d.Mv * *fv;
      Vec gdata = sc.gphi_coeff.cwiseProduct(dphi) + sc.src_dsig.cwiseProduct(dsig);
      if (const Vec* f1 = level_or_null(rhs.F1, k)) gdata += *f1;
      rv.tail(n) = d.M * gdata;
      Vec sol = brk_solver_->solve(rv);
      dv = sol.head(2 * n);
      dp = sol.tail(n);
    }

    Vec transport = Vec::Zero(n);
    if (opts_.velocity_enabled)
      transport = step_conv_phi(s) * dphi + step_conv_vel(s) * dv;

    Vec src = sc.src_dsig.cwiseProduct(dsig) + sc.src_dphi.cwiseProduct(dphi);
    if (du) src -= sc.hphi.cwiseProduct((*du)[s]);
    if (const Vec* f2 = level_or_null(rhs.F2, k)) src += *f2;

    Vec r2(2 * n);
    r2.head(n) = d.Ml.cwiseProduct(dphi) - dt * transport +
                 dt * d.Ml.cwiseProduct(src);
    Vec mu_data = sc.psi2.cwiseProduct(dphi) - opts_.stabilization_S * dphi -
                  chi * dsig;
    if (const Vec* f3 = level_or_null(rhs.F3, k)) mu_data += *f3;
    r2.tail(n) = d.Ml.cwiseProduct(mu_data);

    Vec sol = ch_solver_->solve(r2);
    dphi = sol.head(n);
    dmu = sol.tail(n);

    StateSnapshot snap = zero_snap();
    snap.phi.v = dphi;
    snap.mu.v = dmu;
    snap.sigma.v = dsig;
    snap.vel.v = dv;
    snap.pressure.v = dp;
    out.snaps[k] = std::move(snap);
  }
  return out;
}

LinearizedSolution solve_linearized(const TrajectoryLinearization& lin,
                                    const LinearizedRHS& rhs) {
  return lin.forward(rhs, nullptr);
}

LinearizedSolution frechet_state(const TrajectoryLinearization& lin,
                                 const std::vector<Vec>& h_dir) {
  require(int(h_dir.size()) == lin.n_steps(), ErrorKind::invalid_argument,
          "frechet_state: direction must have one slice per step");
  LinearizedRHS zero;
  return lin.forward(zero, &h_dir);
}

}  // namespace chb
