#pragma once

#include <array>
#include <vector>

#include "chb/grid.hpp"

namespace chb {

/// Physical constants of the tumor-growth system plus the constant-in-time
/// vascular nutrient level sigma_B (a nodal field).
///
/// Sign conventions: T, eta, nu, m, b must be positive; P, A, lambda, chi
/// must be nonnegative; epsilon is fixed to 1.  The nutrient constant is
/// named nutrient_b and the control box bound bound_upper elsewhere to keep
/// the two apart.
struct ModelParams {
  double proliferation_P = 0.0;
  double apoptosis_A = 0.0;
  double chemotaxis_chi = 0.0;
  double permeability_nu = 1.0;
  double shear_eta = 1.0;
  double bulk_lambda = 0.0;
  double mobility_m = 1.0;
  double nutrient_b = 1.0;
  double epsilon = 1.0;
  double final_time_T = 1.0;
  ScalarField sigma_B;  // constant in time

  void validate() const;
};

/// Double-well potential psi(s) = (s^2-1)^2/4 or its smoothed variant
/// psi_delta which agrees with psi on [-delta,delta] and has
/// |psi_delta'''| <= 6(delta+1) on all of R.
///
/// The smoothed variant is defined through the third derivative
/// 6 s xi_delta(|s|); lower orders are recovered from antiderivative tables
/// built once at construction (composite Gauss-Legendre on the cutoff band,
/// verified against a coarser table to 1e-11).  Instances are immutable and
/// safe to share across threads.
class Potential {
 public:
  enum class Kind { double_well, smoothed };

  Potential() : kind_(Kind::double_well) {}
  static Potential double_well() { return Potential(); }
  static Potential smoothed(double delta);

  Kind kind() const { return kind_; }
  double delta() const { return delta_; }

  /// psi and derivatives; order in 0..3.
  double eval(double s, int order) const;

  /// Sup of |psi'''| usable in the globality conditions: 6r for the
  /// double well restricted to [-r,r], 6(delta+1) for the smoothed kind.
  double third_derivative_sup(double r) const;

 private:
  explicit Potential(double delta);

  Kind kind_;
  double delta_ = 0.0;
  // antiderivative tables on the band [delta, delta+1]
  std::vector<double> band_s_, band_i2_, band_i1_, band_i0_;
  double tail_i2_ = 0.0, tail_i1_ = 0.0, tail_i0_ = 0.0;

  double i2(double s) const;
  double i1(double s) const;
  double i0(double s) const;
};

/// Smooth cutoff: 1 on [0,delta], 0 on [delta+1,inf), and
/// zeta(1+s-delta) zeta(1+delta-s) / zeta(1)^2 in between, where
/// zeta(s) = exp(-1/s^2) for s > 0 and 0 otherwise.
double xi_delta(double delta, double s);

double smooth_bump_zeta(double s);

/// Interpolation function h with C^3-oriented regularization.  The raw
/// variants
///   linear_clamp:        max{0, min{1, (1+s)/2}}
///   quadratic_interface: max{0, (1-s^2)/2}
///   cosine_interface:    (cos(pi clamp(s,-1,1)) + 1)/2
/// have kinks at s = +-1; inside a one-sided band of the given width next to
/// each kink the raw piece is blended into the adjacent constant with a
/// quintic smoothstep weight.  Outside the bands the raw formula holds
/// exactly, as do h(-1) and h(1).
class InterpolationH {
 public:
  enum class Variant { linear_clamp, quadratic_interface, cosine_interface };

  explicit InterpolationH(Variant variant, double regularization_width = 0.1);

  Variant variant() const { return variant_; }
  double width() const { return width_; }

  /// h and derivatives; order in 0..3.
  double eval(double s, int order) const;

  /// Numerically sampled sup of |h^(order)| over R (dense sampling with band
  /// refinement, cached at construction).  Feeds the globality conditions.
  double derivative_sup(int order) const;

  void eval_nodal(const Vec& s, int order, Vec& out) const;

 private:
  Variant variant_;
  double width_;
  std::array<double, 4> sup_{};

  double raw_inner(double s, int order) const;  // active (non-constant) piece
  double outer_left(int order) const;
  double outer_right(int order) const;
};

/// Convenience wrappers mirroring the operation-style interface.
double psi_eval(const Potential& pot, double s, int order);
double h_eval(const InterpolationH& h, double s, int order);

}  // namespace chb
