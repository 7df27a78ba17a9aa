#include "chb/certificates.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace chb {

namespace {

// time-trapezoid / lumped-space norms over costate-sized level arrays
double l1l1_norm(const TrajectoryLinearization& lin, const Discretization& d,
                 const std::vector<Vec>& levels) {
  double acc = 0.0;
  for (int k = 0; k < int(levels.size()); ++k)
    acc += lin.level_weight(k) * d.Ml.dot(levels[k].cwiseAbs());
  return acc;
}

double linf_norm(const std::vector<Vec>& levels) {
  double m = 0.0;
  for (const Vec& v : levels) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

double l2l2_norm(const TrajectoryLinearization& lin, const Discretization& d,
                 const std::vector<Vec>& levels) {
  double acc = 0.0;
  for (int k = 0; k < int(levels.size()); ++k)
    acc += lin.level_weight(k) * levels[k].dot(d.Ml.cwiseProduct(levels[k]));
  return std::sqrt(std::max(0.0, acc));
}

}  // namespace

CertificateReport certify_global(const ReducedProblem& problem,
                                 const ControlField& u,
                                 const ReducedProblem::Evaluated& at,
                                 const CertifyConstants& constants) {
  const Discretization& d = problem.disc();
  const TrajectoryLinearization& lin = *at.lin;
  const int N = lin.n_steps();
  const InterpolationH& h = problem.interpolation();
  const Potential& pot = problem.potential();
  const double kappa = problem.objective().kappa;
  const double alpha1 = problem.objective().alpha1;
  const double P = problem.params().proliferation_P;
  const double A = problem.params().apoptosis_A;

  CertificateReport rep;
  rep.configured_T = problem.params().final_time_T;

  // observed phase-field range over the run
  double r = 0.0;
  for (const auto& s : at.base.snaps)
    r = std::max(r, s.phi.v.cwiseAbs().maxCoeff());
  double psi3;
  if (pot.kind() == Potential::Kind::smoothed) {
    psi3 = pot.third_derivative_sup(0.0);
    rep.psi3_path = "smoothed_bound";
  } else {
    psi3 = pot.third_derivative_sup(r);
    rep.psi3_path = "observed_range";
  }
  rep.constants["psi3_sup"] = {psi3, Provenance::estimated};
  rep.constants["phi_range_r"] = {r, Provenance::estimated};
  const double h1sup = h.derivative_sup(1);
  const double h2sup = h.derivative_sup(2);
  rep.constants["h1_sup"] = {h1sup, Provenance::estimated};
  rep.constants["h2_sup"] = {h2sup, Provenance::estimated};

  // nodal combination (P sigma - A)(phi_a - q) - sigma rho - u phi_a per level
  std::vector<Vec> comb(N + 1), tau(N + 1), phia(N + 1);
  for (int k = 0; k <= N; ++k) {
    const Vec& sig = at.base.snaps[k].sigma.v;
    const Vec& uk = u.values[std::min(k, N - 1)];
    const auto& cs = at.costate.snaps[k];
    comb[k] = (P * sig.array() - A)
                  .matrix()
                  .cwiseProduct(cs.phi_a.v - cs.q.v) -
              sig.cwiseProduct(cs.rho.v) - uk.cwiseProduct(cs.phi_a.v);
    tau[k] = cs.tau.v;
    phia[k] = cs.phi_a.v;
  }
  const double comb_l1 = l1l1_norm(lin, d, comb);
  const double comb_inf = linf_norm(comb);
  const double tau_l1 = l1l1_norm(lin, d, tau);
  const double tau_inf = linf_norm(tau);
  const double phia_l2 = l2l2_norm(lin, d, phia);
  const double phia_inf = linf_norm(phia);

  // first globality condition (needs the state Lipschitz constant)
  require(constants.L1.has_value(), ErrorKind::missing_constants,
          "certify: the first globality condition needs L1");
  const double L1 = constants.L1->value;
  rep.constants["L1"] = *constants.L1;
  {
    ConditionResult c;
    c.name = "G1";
    c.left = 0.5 * kappa;
    c.right = comb_l1 * h2sup * L1 * L1 + tau_l1 * psi3 * L1 * L1 +
              phia_l2 * h1sup * L1;
    c.satisfied = c.left >= c.right;
    c.strict = c.left > c.right;
    rep.conditions.push_back(c);
  }

  // second globality condition with free parameter theta
  double theta;
  Provenance theta_prov;
  const double g21_right = phia_inf * phia_inf * h2sup;
  if (constants.theta.has_value()) {
    theta = constants.theta->value;
    theta_prov = constants.theta->provenance;
  } else if (kappa > 0.0 && g21_right > 0.0) {
    theta = g21_right / (2.0 * kappa);  // smallest feasible choice
    theta_prov = Provenance::estimated;
  } else {
    theta = 1.0;
    theta_prov = Provenance::estimated;
  }
  rep.constants["theta"] = {theta, theta_prov};

  ConditionResult g21;
  g21.name = "G2.1";
  g21.left = 2.0 * kappa * theta;
  g21.right = g21_right;
  g21.satisfied = g21.left >= g21.right;
  g21.strict = g21.left > g21.right;
  rep.conditions.push_back(g21);

  ConditionResult g22;
  g22.name = "G2.2";
  g22.left = 0.5 * alpha1;
  g22.right = comb_inf * h2sup + tau_inf * psi3 +
              theta * phia_inf * phia_inf * h1sup * h1sup;
  g22.satisfied = g22.left >= g22.right;
  g22.strict = g22.left > g22.right;
  rep.conditions.push_back(g22);

  ConditionResult g2;
  g2.name = "G2";
  g2.left = 0.0;
  g2.right = 0.0;
  g2.satisfied = g21.satisfied && g22.satisfied;
  g2.strict = g21.strict && g22.strict;
  rep.conditions.push_back(g2);

  ConditionResult u1;
  u1.name = "U1";
  u1.left = rep.conditions[0].left;
  u1.right = rep.conditions[0].right;
  u1.satisfied = rep.conditions[0].strict;
  u1.strict = rep.conditions[0].strict;
  rep.conditions.push_back(u1);

  ConditionResult u2;
  u2.name = "U2";
  u2.left = g21.left;
  u2.right = g21.right;
  u2.satisfied = g21.strict && g22.satisfied;
  u2.strict = u2.satisfied;
  rep.conditions.push_back(u2);

  // small-time uniqueness bound when the remaining constants are available
  if (constants.L3 && constants.c_p && constants.c_q) {
    rep.constants["L3"] = *constants.L3;
    rep.constants["c_p"] = *constants.c_p;
    rep.constants["c_q"] = *constants.c_q;
    // discrete L2(H1) norm of the adjoint phase field
    double acc = 0.0;
    for (int k = 0; k <= N; ++k) {
      const Vec& a = at.costate.snaps[k].phi_a.v;
      acc += lin.level_weight(k) *
             (a.dot(d.M * a) + a.dot(d.K * a));
    }
    double phia_l2h1 = std::sqrt(std::max(0.0, acc));
    rep.constants["phi_a_l2h1"] = {phia_l2h1, Provenance::estimated};
    double bound = uniqueness_time_bound(kappa, L1, constants.L3->value,
                                         phia_l2h1, constants.c_p->value,
                                         constants.c_q->value, h1sup);
    rep.uniqueness_time_bound_value = bound;
    rep.time_bound_satisfied = rep.configured_T < bound;
  }
  return rep;
}

double uniqueness_time_bound(double kappa, double L1, double L3,
                             double phi_costate_norm, double c_p, double c_q,
                             double h_prime_sup) {
  require(kappa > 0.0, ErrorKind::nonpositive_kappa,
          "uniqueness bound: kappa must be positive");
  require(L1 >= 0.0 && L3 >= 0.0 && c_p >= 0.0 && c_q >= 0.0 &&
              phi_costate_norm >= 0.0 && h_prime_sup >= 0.0,
          ErrorKind::invalid_argument,
          "uniqueness bound: constants must be nonnegative");
  const double den = 2.0 * (std::sqrt(2.0) * L1 * c_p * c_q +
                            L3 * phi_costate_norm * h_prime_sup);
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(std::sqrt(3.0) * kappa / den, 4.0 / 3.0);
}

double estimate_lipschitz(const ReducedProblem& problem,
                          const ControlField& box_template, LipschitzKind kind,
                          int n_pairs, std::uint64_t seed, LipschitzNorm norm) {
  require(n_pairs >= 2, ErrorKind::invalid_argument,
          "estimate_lipschitz: need at least two pairs");
  const Discretization& d = problem.disc();
  const int n = d.n();

  auto draw = [&](std::uint64_t s) {
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ControlField u = box_template;
    for (int k = 0; k < u.n_steps; ++k)
      for (int i = 0; i < n; ++i)
        u.values[k][i] = u.lower[k][i] +
                         uni(rng) * (u.upper[k][i] - u.lower[k][i]);
    return u;
  };

  auto map_norm = [&](const ControlField& u, const ControlField& v) {
    Trajectory bu = problem.solve(u);
    Trajectory bv = problem.solve(v);
    auto field_diff = [&](auto pick) {
      double acc = 0.0;
      for (int k = 0; k <= bu.n_steps; ++k) {
        double w = (k == 0 || k == bu.n_steps) ? 0.5 * bu.dt : bu.dt;
        Vec e = pick(bu.snaps[k]) - pick(bv.snaps[k]);
        acc += w * e.dot(d.Ml.cwiseProduct(e));
      }
      return acc;
    };
    if (kind == LipschitzKind::state) {
      double acc = field_diff([](const StateSnapshot& s) { return s.phi.v; });
      if (norm == LipschitzNorm::all_fields_l2l2) {
        acc += field_diff([](const StateSnapshot& s) { return s.mu.v; });
        acc += field_diff([](const StateSnapshot& s) { return s.sigma.v; });
        acc += field_diff([](const StateSnapshot& s) { return s.pressure.v; });
        for (int k = 0; k <= bu.n_steps; ++k) {
          double w = (k == 0 || k == bu.n_steps) ? 0.5 * bu.dt : bu.dt;
          Vec e = bu.snaps[k].vel.v - bv.snaps[k].vel.v;
          acc += w * e.dot(d.Mv * e);
        }
      }
      return std::sqrt(std::max(0.0, acc));
    }
    TrajectoryLinearization lu(d, bu, problem.params(),
                               problem.interpolation(), problem.potential(),
                               problem.options());
    TrajectoryLinearization lv(d, bv, problem.params(),
                               problem.interpolation(), problem.potential(),
                               problem.options());
    CostateTrajectory cu = solve_costate(lu, problem.objective());
    CostateTrajectory cv = solve_costate(lv, problem.objective());
    double acc = 0.0;
    for (int k = 0; k <= bu.n_steps; ++k) {
      double w = (k == 0 || k == bu.n_steps) ? 0.5 * bu.dt : bu.dt;
      Vec e = cu.snaps[k].phi_a.v - cv.snaps[k].phi_a.v;
      acc += w * e.dot(d.Ml.cwiseProduct(e));
      if (norm == LipschitzNorm::all_fields_l2l2) {
        Vec et = cu.snaps[k].tau.v - cv.snaps[k].tau.v;
        Vec er = cu.snaps[k].rho.v - cv.snaps[k].rho.v;
        acc += w * (et.dot(d.Ml.cwiseProduct(et)) +
                    er.dot(d.Ml.cwiseProduct(er)));
      }
    }
    return std::sqrt(std::max(0.0, acc));
  };

  double best = 0.0;
  for (int pair = 0; pair < n_pairs; ++pair) {
    ControlField a = draw(split_seed(seed, 2 * pair));
    ControlField b = draw(split_seed(seed, 2 * pair + 1));
    std::vector<Vec> diff(a.n_steps);
    for (int k = 0; k < a.n_steps; ++k) diff[k] = a.values[k] - b.values[k];
    double den = control_norm(d, a.dt, diff);
    if (den < 1e-13) continue;  // never rate an (effectively) identical pair
    best = std::max(best, map_norm(a, b) / den);
  }
  return best;
}

double estimate_sobolev_constant(const Discretization& d, double p,
                                 int n_starts, std::uint64_t seed) {
  require(p >= 1.0 && p <= 6.0, ErrorKind::invalid_p,
          "estimate_sobolev_constant: p must be in [1,6]");
  const int n = d.n();

  auto lp = [&](const Vec& v) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += d.Ml[i] * std::pow(std::abs(v[i]), p);
    return std::pow(acc, 1.0 / p);
  };
  auto h1 = [&](const Vec& v) {
    return std::sqrt(v.dot(d.Ml.cwiseProduct(v)) + v.dot(d.K * v));
  };
  auto quotient = [&](const Vec& v) { return lp(v) / h1(v); };

  double best = 0.0;
  for (int start = 0; start < n_starts; ++start) {
    std::mt19937_64 rng(split_seed(seed, start));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uni(rng);
    v /= h1(v);
    double q = quotient(v);
    double step = 1.0;
    for (int it = 0; it < 400 && step > 1e-12; ++it) {
      double lpv = lp(v), h1v = h1(v);
      Vec glp(n);
      for (int i = 0; i < n; ++i)
        glp[i] = std::pow(lpv, 1.0 - p) * d.Ml[i] *
                 std::pow(std::abs(v[i]), p - 1.0) *
                 (v[i] >= 0.0 ? 1.0 : -1.0);
      Vec gh1 = (d.Ml.cwiseProduct(v) + d.K * v) / h1v;
      Vec dir = glp / lpv - gh1 / h1v;  // ascent on log quotient
      bool accepted = false;
      while (step > 1e-12) {
        Vec vt = v + step * dir;
        double ht = h1(vt);
        if (ht > 0.0) {
          vt /= ht;
          double qt = quotient(vt);
          if (qt > q * (1.0 + 1e-14)) {
            v = std::move(vt);
            q = qt;
            step *= 1.5;
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    best = std::max(best, q);
  }
  return best;
}

std::string format_certificate_report(const CertificateReport& rep) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "[certificate]\n";
  for (const auto& c : rep.conditions) {
    os << "condition." << c.name << ".left = " << num(c.left) << "\n";
    os << "condition." << c.name << ".right = " << num(c.right) << "\n";
    os << "condition." << c.name
       << ".satisfied = " << (c.satisfied ? "true" : "false") << "\n";
    os << "condition." << c.name << ".strict = " << (c.strict ? "true" : "false")
       << "\n";
  }
  for (const auto& [name, cv] : rep.constants) {
    os << "constant." << name << ".value = " << num(cv.value) << "\n";
    os << "constant." << name << ".provenance = "
       << (cv.provenance == Provenance::configured ? "configured" : "estimated")
       << "\n";
  }
  os << "psi3.path = " << rep.psi3_path << "\n";
  if (rep.uniqueness_time_bound_value) {
    os << "uniqueness.T_bound = " << num(*rep.uniqueness_time_bound_value)
       << "\n";
    os << "uniqueness.T = " << num(rep.configured_T) << "\n";
    os << "uniqueness.satisfied = "
       << (rep.time_bound_satisfied ? "true" : "false") << "\n";
  }
  os << "note = certificates are numerical evidence; Lipschitz and Sobolev "
        "constants are sampled lower bounds\n";
  return os.str();
}

}  // namespace chb
