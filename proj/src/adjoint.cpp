#include "chb/adjoint.hpp"

#include <cmath>

namespace chb {

namespace {

const Vec* level_or_null(const std::vector<Vec>& arr, int k) {
  if (arr.empty()) return nullptr;
  if (k < 0 || k >= int(arr.size())) return nullptr;
  if (arr[k].size() == 0) return nullptr;
  return &arr[k];
}

CostateSnapshot zero_costate(const GridPtr& g) {
  CostateSnapshot s;
  s.phi_a = ScalarField(g);
  s.tau = ScalarField(g);
  s.rho = ScalarField(g);
  s.q = ScalarField(g);
  s.w = VectorField2(g);
  return s;
}

}  // namespace

CostateTrajectory solve_adjoint_general(const TrajectoryLinearization& lin,
                                        const AdjointRHS& rhs) {
  const Discretization& d = lin.disc();
  const int n = d.n();
  const int N = lin.n_steps();
  const double dt = lin.dt();
  const double chi = lin.params().chemotaxis_chi;
  const double S = lin.options().stabilization_S;
  const bool velocity = lin.options().velocity_enabled;

  CostateTrajectory out;
  out.grid = d.grid;
  out.dt = dt;
  out.n_steps = N;
  out.snaps.resize(N + 1);
  for (auto& s : out.snaps) s = zero_costate(d.grid);

  // Accumulators for the stationarity at the incoming time level: the CH
  // rows pair (phi, mu) there.
  Vec yphi = Vec::Zero(n), ymu = Vec::Zero(n);
  if (rhs.G0.size()) {
    require(rhs.G0.size() == n, ErrorKind::invalid_argument,
            "adjoint: G0 size mismatch");
    yphi += d.Ml.cwiseProduct(rhs.G0);
    out.snaps[N].phi_a.v = rhs.G0;
  }
  if (const Vec* g1 = level_or_null(rhs.G1, N))
    yphi += lin.level_weight(N) * d.Ml.cwiseProduct(*g1);
  if (const Vec* gv2 = level_or_null(rhs.Gvec2, N))
    yphi -= lin.level_weight(N) * (d.Gdiv * *gv2);
  if (const Vec* g2 = level_or_null(rhs.G2, N))
    ymu += dt * d.Ml.cwiseProduct(*g2);

  for (int s = N - 1; s >= 0; --s) {
    const int k = s + 1;
    const auto& sc = lin.step(s);

    Vec r2(2 * n);
    r2.head(n) = yphi;
    r2.tail(n) = ymu;
    Vec ac = lin.ch_solver_transposed().solve(r2);
    Vec a = ac.head(n), c = ac.tail(n);

    Vec wdof = Vec::Zero(2 * n), qdof = Vec::Zero(n);
    SpMat Fm, Fphi;
    if (velocity) {
      Fm = lin.step_force_mu(s);
      Fphi = lin.step_force_phi(s);
      Vec rv = Vec::Zero(3 * n);
      rv.head(2 * n) = -dt * (SpMat(lin.step_conv_vel(s)).transpose() * a);
      if (const Vec* gv1 = level_or_null(rhs.Gvec1, k))
        rv.head(2 * n) += dt * (d.Mv * *gv1);
      Vec sol = lin.brinkman_solver_transposed()->solve(rv);
      wdof = sol.head(2 * n);
      qdof = sol.tail(n);
    }

    LinearSolver nut(lin.step_nutrient_operator(s), LinearSolver::Kind::spd,
                     lin.options().linear_tol);
    Vec rhs_sig = dt * d.Ml.cwiseProduct(sc.src_dsig).cwiseProduct(a) -
                  chi * d.Ml.cwiseProduct(c);
    if (const Vec* g3 = level_or_null(rhs.G3, k))
      rhs_sig += dt * d.Ml.cwiseProduct(*g3);
    if (velocity)
      rhs_sig += chi * (SpMat(Fm.transpose()) * wdof) +
                 sc.src_dsig.cwiseProduct(d.M * qdof);
    Vec r = nut.solve(rhs_sig);

    CostateSnapshot& snap = out.snaps[s];
    snap.phi_a.v = a;
    snap.tau.v = c / dt;
    snap.rho.v = -r / dt;
    snap.w.v = wdof / dt;
    snap.q.v = -qdof / dt;
    if (s == N - 1) {
      // terminal level carries the datum plus the last multipliers as
      // right-continuous extensions of the auxiliary fields
      out.snaps[N].tau.v = snap.tau.v;
      out.snaps[N].rho.v = snap.rho.v;
      out.snaps[N].w.v = snap.w.v;
      out.snaps[N].q.v = snap.q.v;
    }

    if (s == 0) break;

    yphi = d.Ml.cwiseProduct(a) +
           dt * d.Ml.cwiseProduct(sc.src_dphi).cwiseProduct(a) -
           dt * (SpMat(lin.step_conv_phi(s)).transpose() * a);
    yphi += d.Ml.cwiseProduct(sc.psi2).cwiseProduct(c) - S * d.Ml.cwiseProduct(c);
    yphi -= sc.nutrient_dphi.cwiseProduct(r);
    ymu = Vec::Zero(n);
    if (velocity) {
      yphi += SpMat(Fphi.transpose()) * wdof +
              sc.gphi_coeff.cwiseProduct(d.M * qdof);
      ymu += SpMat(Fm.transpose()) * wdof;
    }
    if (const Vec* g1 = level_or_null(rhs.G1, s))
      yphi += lin.level_weight(s) * d.Ml.cwiseProduct(*g1);
    if (const Vec* gv2 = level_or_null(rhs.Gvec2, s))
      yphi -= lin.level_weight(s) * (d.Gdiv * *gv2);
    if (const Vec* g2 = level_or_null(rhs.G2, s))
      ymu += dt * d.Ml.cwiseProduct(*g2);
  }
  return out;
}

CostateTrajectory solve_costate(const TrajectoryLinearization& lin,
                                const Objective& objective) {
  const Discretization& d = lin.disc();
  const int N = lin.n_steps();
  objective.validate(d.n(), N + 1);
  const Trajectory& base = lin.base();

  AdjointRHS rhs;
  if (objective.alpha0 != 0.0)
    rhs.G0 = objective.alpha0 * (base.snaps[N].phi.v - objective.phi_f);
  else
    rhs.G0 = Vec::Zero(d.n());
  if (objective.alpha1 != 0.0) {
    rhs.G1.resize(N + 1);
    for (int k = 0; k <= N; ++k)
      rhs.G1[k] = objective.alpha1 * (base.snaps[k].phi.v - objective.phi_d[k]);
  }
  return solve_adjoint_general(lin, rhs);
}

CostateTrajectory frechet_costate(const TrajectoryLinearization& lin,
                                  const Objective& objective,
                                  const std::vector<Vec>& h_dir,
                                  const CostateTrajectory& costate,
                                  const LinearizedSolution& lin_state) {
  const Discretization& d = lin.disc();
  const int n = d.n();
  const int N = lin.n_steps();
  require(int(h_dir.size()) == N, ErrorKind::invalid_argument,
          "frechet_costate: direction must have one slice per step");
  require(int(costate.snaps.size()) == N + 1 &&
              int(lin_state.snaps.size()) == N + 1,
          ErrorKind::invalid_argument, "frechet_costate: incomplete inputs");
  const Trajectory& base = lin.base();
  const ModelParams& p = lin.params();
  const InterpolationH& h = lin.interpolation();
  const Potential& pot = lin.potential();
  const bool velocity = lin.options().velocity_enabled;
  const double chi = p.chemotaxis_chi;

  AdjointRHS rhs;
  rhs.G0 = objective.alpha0 * lin_state.snaps[N].phi.v;
  rhs.G1.assign(N + 1, Vec());
  rhs.G3.assign(N + 1, Vec());
  if (velocity) {
    rhs.G2.assign(N + 1, Vec());
    rhs.Gvec1.assign(N + 1, Vec());
    rhs.Gvec2.assign(N + 1, Vec());
  }

  std::vector<Vec> shift(N + 1);  // phi'[h] phi_a, reused for the q shift
  for (int k = 1; k <= N; ++k) {
    const Vec& phi = base.snaps[k].phi.v;
    const Vec& sig = base.snaps[k].sigma.v;
    const Vec& u = base.control[k - 1];
    const Vec& hd = h_dir[k - 1];
    const Vec& dphi = lin_state.snaps[k].phi.v;
    const Vec& dsig = lin_state.snaps[k].sigma.v;
    const Vec& phia = costate.snaps[k].phi_a.v;
    const Vec& tau = costate.snaps[k].tau.v;
    const Vec& rho = costate.snaps[k].rho.v;
    const Vec& q = costate.snaps[k].q.v;

    Vec h1(n), h2(n), psi3(n);
    for (int i = 0; i < n; ++i) {
      h1[i] = h.eval(phi[i], 1);
      h2[i] = h.eval(phi[i], 2);
      psi3[i] = pot.eval(phi[i], 3);
    }
    Vec hphi(n);
    for (int i = 0; i < n; ++i) hphi[i] = h.eval(phi[i], 0);
    Vec growth = (p.proliferation_P * sig.array() - p.apoptosis_A).matrix();

    shift[k] = dphi.cwiseProduct(phia);

    Vec g1 = (growth - u).cwiseProduct(h2).cwiseProduct(dphi).cwiseProduct(phia);
    g1 += h1.cwiseProduct(p.proliferation_P * dsig - hd).cwiseProduct(phia);
    g1 += (h1.cwiseProduct(dsig) + h2.cwiseProduct(dphi).cwiseProduct(sig))
              .cwiseProduct(rho);
    g1 += psi3.cwiseProduct(dphi).cwiseProduct(tau);
    g1 -= (p.proliferation_P * h1.cwiseProduct(dsig) +
           growth.cwiseProduct(h2).cwiseProduct(dphi))
              .cwiseProduct(q);
    if (objective.alpha1 != 0.0) g1 += objective.alpha1 * dphi;

    Vec g3 = h1.cwiseProduct(dphi).cwiseProduct(
        rho + p.proliferation_P * (phia - q));

    if (velocity) {
      const Vec& dvel = lin_state.snaps[k].vel.v;
      const Vec& w = costate.snaps[k].w.v;
      ScalarField dphif(d.grid, dphi);
      VectorField2 gdphi = nodal_gradient(dphif);
      Vec grad_dot_w =
          gdphi.v.head(n).cwiseProduct(w.head(n)) +
          gdphi.v.tail(n).cwiseProduct(w.tail(n));
      // nodal divergence of the linearized velocity
      ScalarField vx(d.grid, dvel.head(n)), vy(d.grid, dvel.tail(n));
      Vec div_dv = nodal_gradient(vx).v.head(n) + nodal_gradient(vy).v.tail(n);

      g1 -= phia.cwiseProduct(div_dv);
      g3 += chi * grad_dot_w;
      rhs.G2[k] = grad_dot_w;
      Vec gv1(2 * n);
      gv1.head(n) = -phia.cwiseProduct(gdphi.v.head(n));
      gv1.tail(n) = -phia.cwiseProduct(gdphi.v.tail(n));
      rhs.Gvec1[k] = gv1;
      const Vec& dmu = lin_state.snaps[k].mu.v;
      Vec coef = dmu + chi * dsig;
      Vec gv2(2 * n);
      gv2.head(n) = phia.cwiseProduct(dvel.head(n)) - coef.cwiseProduct(w.head(n));
      gv2.tail(n) = phia.cwiseProduct(dvel.tail(n)) - coef.cwiseProduct(w.tail(n));
      rhs.Gvec2[k] = gv2;
    }

    if (velocity) {
      // pressure-reformulation shifts of the q-coupled sources
      g1 -= growth.cwiseProduct(h1).cwiseProduct(shift[k]);
      g3 -= p.proliferation_P * hphi.cwiseProduct(shift[k]);
    }

    rhs.G1[k] = std::move(g1);
    rhs.G3[k] = std::move(g3);
  }

  CostateTrajectory out = solve_adjoint_general(lin, rhs);
  if (velocity) {
    for (int k = 1; k <= N; ++k) out.snaps[k].q.v += shift[k];
  }
  return out;
}

double duality_pairing_solution(const TrajectoryLinearization& lin,
                                const LinearizedSolution& sol,
                                const AdjointRHS& g) {
  const Discretization& d = lin.disc();
  const int N = lin.n_steps();
  const double dt = lin.dt();
  double acc = 0.0;
  if (g.G0.size()) acc += sol.snaps[N].phi.v.dot(d.Ml.cwiseProduct(g.G0));
  for (int k = 1; k <= N; ++k) {
    const double w = lin.level_weight(k);
    if (const Vec* g1 = level_or_null(g.G1, k))
      acc += w * sol.snaps[k].phi.v.dot(d.Ml.cwiseProduct(*g1));
    if (const Vec* gv2 = level_or_null(g.Gvec2, k))
      acc -= w * sol.snaps[k].phi.v.dot(d.Gdiv * *gv2);
    if (const Vec* g2 = level_or_null(g.G2, k))
      acc += dt * sol.snaps[k].mu.v.dot(d.Ml.cwiseProduct(*g2));
    if (const Vec* g3 = level_or_null(g.G3, k))
      acc += dt * sol.snaps[k].sigma.v.dot(d.Ml.cwiseProduct(*g3));
    if (const Vec* gv1 = level_or_null(g.Gvec1, k))
      acc += dt * sol.snaps[k].vel.v.dot(d.Mv * *gv1);
  }
  return acc;
}

double duality_pairing_costate(const TrajectoryLinearization& lin,
                               const CostateTrajectory& costate,
                               const LinearizedRHS& f,
                               const std::vector<Vec>* du) {
  const Discretization& d = lin.disc();
  const int N = lin.n_steps();
  const double dt = lin.dt();
  double acc = 0.0;
  for (int s = 0; s < N; ++s) {
    const int k = s + 1;
    const CostateSnapshot& cs = costate.snaps[s];
    if (const Vec* f2 = level_or_null(f.F2, k))
      acc += dt * cs.phi_a.v.dot(d.Ml.cwiseProduct(*f2));
    if (const Vec* f3 = level_or_null(f.F3, k))
      acc += dt * cs.tau.v.dot(d.Ml.cwiseProduct(*f3));
    if (const Vec* f4 = level_or_null(f.F4, k))
      acc -= dt * cs.rho.v.dot(d.Ml.cwiseProduct(*f4));
    if (const Vec* fv = level_or_null(f.Fvec, k))
      acc += dt * cs.w.v.dot(d.Mv * *fv);
    if (const Vec* f1 = level_or_null(f.F1, k))
      acc -= dt * cs.q.v.dot(d.M * *f1);
    if (du)
      acc -= dt * cs.phi_a.v.dot(
                 d.Ml.cwiseProduct(lin.step(s).hphi.cwiseProduct((*du)[s])));
  }
  return acc;
}

}  // namespace chb
