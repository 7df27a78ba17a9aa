#include "chb/assembly.hpp"

#include <cmath>
#include <vector>

namespace chb {

namespace {

using Triplet = Eigen::Triplet<double>;

// Reference-element data at the 2x2 Gauss points; the grid is uniform, so
// one set serves every cell.
struct ElemQuad {
  double N[4][4];    // [q][a]
  double dNx[4][4];  // scaled by 1/hx
  double dNy[4][4];  // scaled by 1/hy
  double w;          // hx*hy/4

  ElemQuad(double hx, double hy) {
    const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
    const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
    const double gp[2] = {g0, g1};
    for (int qy = 0; qy < 2; ++qy) {
      for (int qx = 0; qx < 2; ++qx) {
        int q = 2 * qy + qx;
        double xi = gp[qx], eta = gp[qy];
        double sx[2] = {1.0 - xi, xi}, sy[2] = {1.0 - eta, eta};
        double dx[2] = {-1.0, 1.0};
        for (int a = 0; a < 4; ++a) {
          int ax = a & 1, ay = (a >> 1) & 1;
          N[q][a] = sx[ax] * sy[ay];
          dNx[q][a] = dx[ax] * sy[ay] / hx;
          dNy[q][a] = sx[ax] * dx[ay] / hy;
        }
      }
    }
    w = hx * hy / 4.0;
  }
};

template <class Fn>
void for_each_cell(const StructuredGrid& g, Fn&& fn) {
  for (int j = 0; j < g.ny - 1; ++j) {
    for (int i = 0; i < g.nx - 1; ++i) {
      int nodes[4] = {g.node(i, j), g.node(i + 1, j), g.node(i, j + 1),
                      g.node(i + 1, j + 1)};
      fn(nodes);
    }
  }
}

SpMat from_triplets(int rows, int cols, std::vector<Triplet>& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SpMat assemble_mass(const StructuredGrid& g) {
  ElemQuad eq(g.hx(), g.hy());
  double loc[4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int q = 0; q < 4; ++q) s += eq.N[q][a] * eq.N[q][b];
      loc[a][b] = eq.w * s;
    }
  std::vector<Triplet> t;
  t.reserve(size_t(g.num_cells()) * 16);
  for_each_cell(g, [&](const int* n) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) t.emplace_back(n[a], n[b], loc[a][b]);
  });
  return from_triplets(g.num_nodes(), g.num_nodes(), t);
}

SpMat assemble_stiffness_neumann(const StructuredGrid& g) {
  ElemQuad eq(g.hx(), g.hy());
  double loc[4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int q = 0; q < 4; ++q)
        s += eq.dNx[q][a] * eq.dNx[q][b] + eq.dNy[q][a] * eq.dNy[q][b];
      loc[a][b] = eq.w * s;
    }
  std::vector<Triplet> t;
  t.reserve(size_t(g.num_cells()) * 16);
  for_each_cell(g, [&](const int* n) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) t.emplace_back(n[a], n[b], loc[a][b]);
  });
  return from_triplets(g.num_nodes(), g.num_nodes(), t);
}

Discretization Discretization::build(GridPtr grid) {
  Discretization d;
  d.grid = std::move(grid);
  const StructuredGrid& g = *d.grid;
  const int n = g.num_nodes();
  ElemQuad eq(g.hx(), g.hy());

  d.M = assemble_mass(g);
  d.K = assemble_stiffness_neumann(g);
  d.Ml = d.M * Vec::Ones(n);

  std::vector<Triplet> tb, tg, tmv, tks, tkd;
  tb.reserve(size_t(g.num_cells()) * 32);
  tg.reserve(size_t(g.num_cells()) * 32);
  tmv.reserve(size_t(g.num_cells()) * 32);
  tks.reserve(size_t(g.num_cells()) * 64);
  tkd.reserve(size_t(g.num_cells()) * 64);

  for_each_cell(g, [&](const int* nd) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        double m = 0.0, bx = 0.0, by = 0.0, gx = 0.0, gy = 0.0;
        double kxx = 0.0, kxy = 0.0, kyx = 0.0, kyy = 0.0;
        double dxx = 0.0, dxy = 0.0, dyx = 0.0, dyy = 0.0;
        for (int q = 0; q < 4; ++q) {
          m += eq.N[q][a] * eq.N[q][b];
          bx += eq.N[q][a] * eq.dNx[q][b];
          by += eq.N[q][a] * eq.dNy[q][b];
          gx += eq.dNx[q][a] * eq.N[q][b];
          gy += eq.dNy[q][a] * eq.N[q][b];
          // int 2 D(v):D(w); cross terms couple the components
          kxx += 2.0 * eq.dNx[q][a] * eq.dNx[q][b] + eq.dNy[q][a] * eq.dNy[q][b];
          kyy += 2.0 * eq.dNy[q][a] * eq.dNy[q][b] + eq.dNx[q][a] * eq.dNx[q][b];
          kxy += eq.dNy[q][a] * eq.dNx[q][b];
          kyx += eq.dNx[q][a] * eq.dNy[q][b];
          dxx += eq.dNx[q][a] * eq.dNx[q][b];
          dxy += eq.dNx[q][a] * eq.dNy[q][b];
          dyx += eq.dNy[q][a] * eq.dNx[q][b];
          dyy += eq.dNy[q][a] * eq.dNy[q][b];
        }
        const double w = eq.w;
        tb.emplace_back(nd[a], nd[b], w * bx);
        tb.emplace_back(nd[a], n + nd[b], w * by);
        tg.emplace_back(nd[a], nd[b], w * gx);
        tg.emplace_back(nd[a], n + nd[b], w * gy);
        tmv.emplace_back(nd[a], nd[b], w * m);
        tmv.emplace_back(n + nd[a], n + nd[b], w * m);
        tks.emplace_back(nd[a], nd[b], w * kxx);
        tks.emplace_back(n + nd[a], n + nd[b], w * kyy);
        tks.emplace_back(nd[a], n + nd[b], w * kxy);
        tks.emplace_back(n + nd[a], nd[b], w * kyx);
        tkd.emplace_back(nd[a], nd[b], w * dxx);
        tkd.emplace_back(nd[a], n + nd[b], w * dxy);
        tkd.emplace_back(n + nd[a], nd[b], w * dyx);
        tkd.emplace_back(n + nd[a], n + nd[b], w * dyy);
      }
    }
  });

  d.B = from_triplets(n, 2 * n, tb);
  d.Gdiv = from_triplets(n, 2 * n, tg);
  d.Mv = from_triplets(2 * n, 2 * n, tmv);
  d.Ksym2 = from_triplets(2 * n, 2 * n, tks);
  d.Kdd = from_triplets(2 * n, 2 * n, tkd);
  return d;
}

SpMat assemble_brinkman_operator(const Discretization& d, const ModelParams& p,
                                 double pressure_stabilization) {
  require(p.permeability_nu > 0.0, ErrorKind::singular_system,
          "brinkman: permeability nu must be positive");
  require(p.shear_eta > 0.0, ErrorKind::invalid_argument,
          "brinkman: shear viscosity eta must be positive");
  const int n = d.n();
  SpMat A = p.shear_eta * d.Ksym2 + p.bulk_lambda * d.Kdd +
            p.permeability_nu * d.Mv;

  std::vector<Triplet> t;
  t.reserve(size_t(A.nonZeros()) + 2 * size_t(d.B.nonZeros()) +
            size_t(d.K.nonZeros()));
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      t.emplace_back(int(it.row()), int(it.col()), it.value());
  for (int k = 0; k < d.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(d.B, k); it; ++it) {
      // momentum rows get -B^T p; constraint rows get +B v
      t.emplace_back(int(it.col()), 2 * n + int(it.row()), -it.value());
      t.emplace_back(2 * n + int(it.row()), int(it.col()), it.value());
    }
  for (int k = 0; k < d.K.outerSize(); ++k)
    for (SpMat::InnerIterator it(d.K, k); it; ++it)
      t.emplace_back(2 * n + int(it.row()), 2 * n + int(it.col()),
                     pressure_stabilization * it.value());
  return from_triplets(3 * n, 3 * n, t);
}

namespace {

struct CellValues {
  double val[4];    // interpolant at q-points
  double gx[4], gy[4];
};

CellValues interp(const ElemQuad& eq, const Vec& f, const int* nd) {
  CellValues c{};
  for (int q = 0; q < 4; ++q) {
    double v = 0.0, gx = 0.0, gy = 0.0;
    for (int a = 0; a < 4; ++a) {
      v += f[nd[a]] * eq.N[q][a];
      gx += f[nd[a]] * eq.dNx[q][a];
      gy += f[nd[a]] * eq.dNy[q][a];
    }
    c.val[q] = v;
    c.gx[q] = gx;
    c.gy[q] = gy;
  }
  return c;
}

}  // namespace

SpMat assemble_conv_phi(const Discretization& d, const Vec& vel) {
  const StructuredGrid& g = *d.grid;
  const int n = g.num_nodes();
  ElemQuad eq(g.hx(), g.hy());
  std::vector<Triplet> t;
  t.reserve(size_t(g.num_cells()) * 16);
  for_each_cell(g, [&](const int* nd) {
    double vx[4], vy[4], dv[4];
    for (int q = 0; q < 4; ++q) {
      vx[q] = vy[q] = dv[q] = 0.0;
      for (int a = 0; a < 4; ++a) {
        vx[q] += vel[nd[a]] * eq.N[q][a];
        vy[q] += vel[n + nd[a]] * eq.N[q][a];
        dv[q] += vel[nd[a]] * eq.dNx[q][a] + vel[n + nd[a]] * eq.dNy[q][a];
      }
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double s = 0.0;
        for (int q = 0; q < 4; ++q)
          s += eq.N[q][a] * (eq.dNx[q][b] * vx[q] + eq.dNy[q][b] * vy[q] +
                             eq.N[q][b] * dv[q]);
        t.emplace_back(nd[a], nd[b], eq.w * s);
      }
  });
  return from_triplets(n, n, t);
}

SpMat assemble_conv_vel(const Discretization& d, const Vec& phi) {
  const StructuredGrid& g = *d.grid;
  const int n = g.num_nodes();
  ElemQuad eq(g.hx(), g.hy());
  std::vector<Triplet> t;
  t.reserve(size_t(g.num_cells()) * 32);
  for_each_cell(g, [&](const int* nd) {
    CellValues c = interp(eq, phi, nd);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double sx = 0.0, sy = 0.0;
        for (int q = 0; q < 4; ++q) {
          sx += eq.N[q][a] * (c.gx[q] * eq.N[q][b] + c.val[q] * eq.dNx[q][b]);
          sy += eq.N[q][a] * (c.gy[q] * eq.N[q][b] + c.val[q] * eq.dNy[q][b]);
        }
        t.emplace_back(nd[a], nd[b], eq.w * sx);
        t.emplace_back(nd[a], n + nd[b], eq.w * sy);
      }
  });
  return from_triplets(n, 2 * n, t);
}

SpMat assemble_force_coeff_mu(const Discretization& d, const Vec& phi) {
  const StructuredGrid& g = *d.grid;
  const int n = g.num_nodes();
  ElemQuad eq(g.hx(), g.hy());
  std::vector<Triplet> t;
  t.reserve(size_t(g.num_cells()) * 32);
  for_each_cell(g, [&](const int* nd) {
    CellValues c = interp(eq, phi, nd);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double sx = 0.0, sy = 0.0;
        for (int q = 0; q < 4; ++q) {
          sx += eq.N[q][a] * eq.N[q][b] * c.gx[q];
          sy += eq.N[q][a] * eq.N[q][b] * c.gy[q];
        }
        t.emplace_back(nd[a], nd[b], eq.w * sx);
        t.emplace_back(n + nd[a], nd[b], eq.w * sy);
      }
  });
  return from_triplets(2 * n, n, t);
}

SpMat assemble_force_coeff_phi(const Discretization& d, const Vec& coef) {
  const StructuredGrid& g = *d.grid;
  const int n = g.num_nodes();
  ElemQuad eq(g.hx(), g.hy());
  std::vector<Triplet> t;
  t.reserve(size_t(g.num_cells()) * 32);
  for_each_cell(g, [&](const int* nd) {
    CellValues c = interp(eq, coef, nd);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double sx = 0.0, sy = 0.0;
        for (int q = 0; q < 4; ++q) {
          sx += eq.N[q][a] * c.val[q] * eq.dNx[q][b];
          sy += eq.N[q][a] * c.val[q] * eq.dNy[q][b];
        }
        t.emplace_back(nd[a], nd[b], eq.w * sx);
        t.emplace_back(n + nd[a], nd[b], eq.w * sy);
      }
  });
  return from_triplets(2 * n, n, t);
}

Vec load_coeff_grad(const Discretization& d, const Vec& coef, const Vec& grad_of) {
  const StructuredGrid& g = *d.grid;
  const int n = g.num_nodes();
  ElemQuad eq(g.hx(), g.hy());
  Vec out = Vec::Zero(2 * n);
  for_each_cell(g, [&](const int* nd) {
    CellValues cc = interp(eq, coef, nd);
    CellValues cg = interp(eq, grad_of, nd);
    for (int a = 0; a < 4; ++a) {
      double sx = 0.0, sy = 0.0;
      for (int q = 0; q < 4; ++q) {
        sx += eq.N[q][a] * cc.val[q] * cg.gx[q];
        sy += eq.N[q][a] * cc.val[q] * cg.gy[q];
      }
      out[nd[a]] += eq.w * sx;
      out[n + nd[a]] += eq.w * sy;
    }
  });
  return out;
}

double inner_l2(const Discretization& d, const Vec& a, const Vec& b) {
  return a.dot(d.M * b);
}

double integrate_nodal(const Discretization& d, const Vec& f) {
  return d.Ml.dot(f);
}

namespace {

double lp_norm(const Discretization& d, const Vec& v, double p) {
  require(p >= 1.0 && p <= 6.0, ErrorKind::invalid_p,
          "norm: Lp exponent must be in [1,6]");
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    s += d.Ml[i] * std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

double norm_scalar(const Discretization& d, const ScalarField& f, NormKind kind,
                   double p) {
  require_same_grid(d.grid, f.grid);
  switch (kind) {
    case NormKind::L2: return std::sqrt(std::max(0.0, f.v.dot(d.M * f.v)));
    case NormKind::H1:
      return std::sqrt(std::max(0.0, f.v.dot(d.M * f.v) + f.v.dot(d.K * f.v)));
    case NormKind::Linf: return f.v.size() ? f.v.cwiseAbs().maxCoeff() : 0.0;
    default: return lp_norm(d, f.v, p);
  }
}

double norm_vector(const Discretization& d, const VectorField2& f, NormKind kind,
                   double p) {
  require_same_grid(d.grid, f.grid);
  switch (kind) {
    case NormKind::L2: return std::sqrt(std::max(0.0, f.v.dot(d.Mv * f.v)));
    case NormKind::H1:
      return std::sqrt(std::max(
          0.0, f.v.dot(d.Mv * f.v) + f.v.dot(d.Ksym2 * f.v)));
    case NormKind::Linf: {
      const int n = d.n();
      double m = 0.0;
      for (int i = 0; i < n; ++i)
        m = std::max(m, std::hypot(f.v[i], f.v[n + i]));
      return m;
    }
    default: return lp_norm(d, f.v, p);
  }
}

VectorField2 nodal_gradient(const ScalarField& f) {
  const StructuredGrid& g = *f.grid;
  VectorField2 out(f.grid);
  const int n = g.num_nodes();
  const double hx = g.hx(), hy = g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      int id = g.node(i, j);
      double dx, dy;
      if (i == 0)
        dx = (f.v[g.node(1, j)] - f.v[id]) / hx;
      else if (i == g.nx - 1)
        dx = (f.v[id] - f.v[g.node(g.nx - 2, j)]) / hx;
      else
        dx = (f.v[g.node(i + 1, j)] - f.v[g.node(i - 1, j)]) / (2.0 * hx);
      if (j == 0)
        dy = (f.v[g.node(i, 1)] - f.v[id]) / hy;
      else if (j == g.ny - 1)
        dy = (f.v[id] - f.v[g.node(i, g.ny - 2)]) / hy;
      else
        dy = (f.v[g.node(i, j + 1)] - f.v[g.node(i, j - 1)]) / (2.0 * hy);
      out.v[id] = dx;
      out.v[n + id] = dy;
    }
  }
  return out;
}

double divergence_residual_l2(const Discretization& d, const Vec& vel,
                              const Vec& g_nodal) {
  const StructuredGrid& g = *d.grid;
  const int n = g.num_nodes();
  ElemQuad eq(g.hx(), g.hy());
  double acc = 0.0;
  for_each_cell(g, [&](const int* nd) {
    for (int q = 0; q < 4; ++q) {
      double div = 0.0, gv = 0.0;
      for (int a = 0; a < 4; ++a) {
        div += vel[nd[a]] * eq.dNx[q][a] + vel[n + nd[a]] * eq.dNy[q][a];
        gv += g_nodal[nd[a]] * eq.N[q][a];
      }
      acc += eq.w * (div - gv) * (div - gv);
    }
  });
  return std::sqrt(acc);
}

}  // namespace chb
