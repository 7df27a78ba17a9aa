#pragma once

#include "chb/grid.hpp"
#include "chb/model.hpp"

namespace chb {

/// Operators assembled once per grid and shared (read-only) by all solvers.
/// Bilinear tensor-product elements on the uniform rectangle grid; all
/// boundary conditions of the system are natural in these weak forms, so no
/// essential constraints are ever applied.  2x2 Gauss quadrature, which is
/// exact for every form assembled here.
struct Discretization {
  GridPtr grid;
  SpMat M;      // consistent mass
  Vec Ml;       // lumped mass = row sums of M
  SpMat K;      // stiffness with natural Neumann condition
  SpMat B;      // n x 2n divergence coupling: B(i,(c,j)) = int N_i dc N_j
  SpMat Gdiv;   // n x 2n gradient coupling:   (i,(c,j)) = int dc N_i N_j
  SpMat Mv;     // 2n x 2n vector mass
  SpMat Ksym2;  // 2n x 2n: int 2 D(v):D(w)
  SpMat Kdd;    // 2n x 2n: int div v div w

  static Discretization build(GridPtr grid);

  int n() const { return grid->num_nodes(); }
};

SpMat assemble_mass(const StructuredGrid& g);
SpMat assemble_stiffness_neumann(const StructuredGrid& g);

/// Monolithic operator over (vx, vy, p) for the stabilized velocity-pressure
/// solve: viscous block 2 eta D(v):D(w) + lambda div div + nu v.w, divergence
/// constraint, and a pressure-Laplacian stabilization gamma_stab grad p .
/// grad q (equal-order elements).  The stress boundary condition is natural.
SpMat assemble_brinkman_operator(const Discretization& d, const ModelParams& p,
                                 double pressure_stabilization);

// Frozen-coefficient couplings of the time stepper.  All are exact
// bilinear-form slices: e.g. the transport term T(phi, v) = int (grad phi . v
// + phi div v) N_i is linear in each argument with the other fixed.
SpMat assemble_conv_phi(const Discretization& d, const Vec& vel);   // n x 2n -> n x n acting on phi
SpMat assemble_conv_vel(const Discretization& d, const Vec& phi);   // n x 2n acting on vel
SpMat assemble_force_coeff_mu(const Discretization& d, const Vec& phi);    // 2n x n
SpMat assemble_force_coeff_phi(const Discretization& d, const Vec& coef);  // 2n x n

/// Momentum load int I(coef) grad I(g) . (N_i e_c), used for vector sources
/// carrying an interpolant gradient.
Vec load_coeff_grad(const Discretization& d, const Vec& coef, const Vec& g);

enum class NormKind { L2, H1, Linf, Lp };

double norm_scalar(const Discretization& d, const ScalarField& f, NormKind kind,
                   double p = 2.0);
double norm_vector(const Discretization& d, const VectorField2& f, NormKind kind,
                   double p = 2.0);
double inner_l2(const Discretization& d, const Vec& a, const Vec& b);

/// int I(f) dx (equals the lumped-mass weighted sum).
double integrate_nodal(const Discretization& d, const Vec& f);

/// Central-difference nodal gradient (one-sided at the boundary).
VectorField2 nodal_gradient(const ScalarField& f);

/// || div I(v) - I(g) ||_{L2}, by element quadrature.
double divergence_residual_l2(const Discretization& d, const Vec& vel,
                              const Vec& g);

}  // namespace chb
