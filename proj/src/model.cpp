#include "chb/model.hpp"

#include <cmath>

namespace chb {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] via Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

struct Gauss20 {
  std::vector<double> x, w;
  Gauss20() { gauss_legendre(20, x, w); }
};
const Gauss20& g20() {
  static const Gauss20 g;
  return g;
}

template <class F>
double integrate(const F& f, double a, double b) {
  const auto& g = g20();
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (size_t q = 0; q < g.x.size(); ++q) s += g.w[q] * f(mid + half * g.x[q]);
  return half * s;
}

double dw_eval(double s, int order) {
  switch (order) {
    case 0: return 0.25 * (s * s - 1.0) * (s * s - 1.0);
    case 1: return s * s * s - s;
    case 2: return 3.0 * s * s - 1.0;
    default: return 6.0 * s;
  }
}

}  // namespace

void ModelParams::validate() const {
  require(final_time_T > 0.0 && shear_eta > 0.0 && permeability_nu > 0.0 &&
              mobility_m > 0.0 && nutrient_b > 0.0,
          ErrorKind::invalid_argument,
          "params: T, eta, nu, m, b must be positive");
  require(proliferation_P >= 0.0 && apoptosis_A >= 0.0 &&
              bulk_lambda >= 0.0 && chemotaxis_chi >= 0.0,
          ErrorKind::invalid_argument,
          "params: P, A, lambda, chi must be nonnegative");
  require(epsilon == 1.0, ErrorKind::invalid_argument,
          "params: epsilon is fixed to 1");
  if (sigma_B.grid) {
    require(sigma_B.finite(), ErrorKind::invalid_argument,
            "params: sigma_B must be finite");
  }
}

double smooth_bump_zeta(double s) {
  if (s <= 0.0) return 0.0;
  return std::exp(-1.0 / (s * s));
}

double xi_delta(double delta, double s) {
  require(delta > 1.0, ErrorKind::invalid_delta, "xi_delta: delta must be > 1");
  require(s >= 0.0, ErrorKind::invalid_argument, "xi_delta: s must be >= 0");
  if (s <= delta) return 1.0;
  if (s >= delta + 1.0) return 0.0;
  const double z1 = smooth_bump_zeta(1.0 + s - delta);
  const double z2 = smooth_bump_zeta(1.0 + delta - s);
  const double zn = smooth_bump_zeta(1.0);
  return z1 * z2 / (zn * zn);
}

Potential Potential::smoothed(double delta) { return Potential(delta); }

Potential::Potential(double delta) : kind_(Kind::smoothed), delta_(delta) {
  require(delta > 1.0, ErrorKind::invalid_delta,
          "smoothed potential: delta must be > 1");

  auto f3 = [delta](double z) { return z * xi_delta(delta, std::abs(z)); };

  auto build = [&](int n_band, std::vector<double>& bs, std::vector<double>& b2,
                   std::vector<double>& b1, std::vector<double>& b0) {
    bs.resize(n_band + 1);
    b2.resize(n_band + 1);
    b1.resize(n_band + 1);
    b0.resize(n_band + 1);
    for (int k = 0; k <= n_band; ++k) bs[k] = delta + double(k) / n_band;
    b2[0] = 0.5 * delta * delta;
    b1[0] = delta * delta * delta / 6.0;
    b0[0] = delta * delta * delta * delta / 24.0;
    auto eval_i2 = [&](int k, double y) {
      return b2[k] + integrate(f3, bs[k], y);
    };
    for (int k = 0; k < n_band; ++k) {
      b2[k + 1] = eval_i2(k, bs[k + 1]);
      auto f_i2 = [&](double y) { return eval_i2(k, y); };
      b1[k + 1] = b1[k] + integrate(f_i2, bs[k], bs[k + 1]);
      auto f_i1 = [&](double y) {
        return b1[k] + integrate(f_i2, bs[k], y);
      };
      b0[k + 1] = b0[k] + integrate(f_i1, bs[k], bs[k + 1]);
    }
  };

  build(256, band_s_, band_i2_, band_i1_, band_i0_);

  // Cross-check against a coarser composite rule; the tables must agree to
  // the 1e-10 construction tolerance with margin.
  std::vector<double> cs, c2, c1, c0;
  build(128, cs, c2, c1, c0);
  for (int k = 0; k <= 128; ++k) {
    double d = std::abs(c0[k] - band_i0_[2 * k]) +
               std::abs(c1[k] - band_i1_[2 * k]) +
               std::abs(c2[k] - band_i2_[2 * k]);
    require(d < 1e-11, ErrorKind::invalid_argument,
            "smoothed potential: antiderivative tables failed verification");
  }

  tail_i2_ = band_i2_.back();
  tail_i1_ = band_i1_.back();
  tail_i0_ = band_i0_.back();
}

double Potential::i2(double s) const {
  if (s <= delta_) return 0.5 * s * s;
  if (s >= delta_ + 1.0) return tail_i2_;
  int n = int(band_s_.size()) - 1;
  int k = std::min(n - 1, int((s - delta_) * n));
  auto f3 = [this](double z) { return z * xi_delta(delta_, std::abs(z)); };
  return band_i2_[k] + integrate(f3, band_s_[k], s);
}

double Potential::i1(double s) const {
  if (s <= delta_) return s * s * s / 6.0;
  if (s >= delta_ + 1.0) return tail_i1_ + tail_i2_ * (s - delta_ - 1.0);
  int n = int(band_s_.size()) - 1;
  int k = std::min(n - 1, int((s - delta_) * n));
  auto f_i2 = [this](double y) { return i2(y); };
  return band_i1_[k] + integrate(f_i2, band_s_[k], s);
}

double Potential::i0(double s) const {
  if (s <= delta_) return s * s * s * s / 24.0;
  if (s >= delta_ + 1.0) {
    double t = s - delta_ - 1.0;
    return tail_i0_ + tail_i1_ * t + 0.5 * tail_i2_ * t * t;
  }
  int n = int(band_s_.size()) - 1;
  int k = std::min(n - 1, int((s - delta_) * n));
  auto f_i1 = [this](double y) { return i1(y); };
  return band_i0_[k] + integrate(f_i1, band_s_[k], s);
}

double Potential::eval(double s, int order) const {
  require(order >= 0 && order <= 3, ErrorKind::invalid_argument,
          "psi_eval: order must be in 0..3");
  if (kind_ == Kind::double_well) return dw_eval(s, order);
  const double a = std::abs(s);
  if (a <= delta_) return dw_eval(s, order);
  switch (order) {
    case 0: return 0.25 - 0.5 * s * s + 6.0 * i0(a);
    case 1: return -s + 6.0 * (s >= 0.0 ? 1.0 : -1.0) * i1(a);
    case 2: return -1.0 + 6.0 * i2(a);
    default: return 6.0 * s * xi_delta(delta_, a);
  }
}

double Potential::third_derivative_sup(double r) const {
  if (kind_ == Kind::double_well) return 6.0 * std::abs(r);
  return 6.0 * (delta_ + 1.0);
}

double psi_eval(const Potential& pot, double s, int order) {
  return pot.eval(s, order);
}

namespace {

// Quintic smoothstep weight and derivatives on [0,1].
double smoothstep(double t, int order) {
  switch (order) {
    case 0: return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    case 1: return 30.0 * t * t * (1.0 - t) * (1.0 - t);
    case 2: return 60.0 * t - 180.0 * t * t + 120.0 * t * t * t;
    default: return 60.0 - 360.0 * t + 360.0 * t * t;
  }
}

}  // namespace

InterpolationH::InterpolationH(Variant variant, double regularization_width)
    : variant_(variant), width_(regularization_width) {
  require(width_ > 0.0 && width_ <= 0.5, ErrorKind::invalid_argument,
          "interpolation h: regularization width must be in (0, 0.5]");
  // Sampled sup of |h^(k)|; refine inside the blending bands where the
  // higher derivatives peak.
  for (int order = 0; order <= 3; ++order) {
    double m = 0.0;
    const int nc = 20000;
    for (int i = 0; i <= nc; ++i) {
      double s = -2.0 + 4.0 * double(i) / nc;
      m = std::max(m, std::abs(eval(s, order)));
    }
    const int nb = 4000;
    for (int i = 0; i <= nb; ++i) {
      double t = double(i) / nb;
      m = std::max(m, std::abs(eval(-1.0 + width_ * t, order)));
      m = std::max(m, std::abs(eval(1.0 - width_ * t, order)));
    }
    sup_[order] = m;
  }
}

double InterpolationH::raw_inner(double s, int order) const {
  switch (variant_) {
    case Variant::linear_clamp:
      switch (order) {
        case 0: return 0.5 * (1.0 + s);
        case 1: return 0.5;
        default: return 0.0;
      }
    case Variant::quadratic_interface:
      switch (order) {
        case 0: return 0.5 * (1.0 - s * s);
        case 1: return -s;
        case 2: return -1.0;
        default: return 0.0;
      }
    default:  // cosine_interface
      switch (order) {
        case 0: return 0.5 * (std::cos(M_PI * s) + 1.0);
        case 1: return -0.5 * M_PI * std::sin(M_PI * s);
        case 2: return -0.5 * M_PI * M_PI * std::cos(M_PI * s);
        default: return 0.5 * M_PI * M_PI * M_PI * std::sin(M_PI * s);
      }
  }
}

double InterpolationH::outer_left(int order) const {
  (void)order;
  return 0.0;
}

double InterpolationH::outer_right(int order) const {
  if (variant_ == Variant::linear_clamp) return order == 0 ? 1.0 : 0.0;
  return 0.0;
}

double InterpolationH::eval(double s, int order) const {
  require(order >= 0 && order <= 3, ErrorKind::invalid_argument,
          "h_eval: order must be in 0..3");
  const double w = width_;
  if (s <= -1.0) return order == 0 ? outer_left(0) : 0.0;
  if (s >= 1.0) return order == 0 ? outer_right(0) : 0.0;
  if (s > -1.0 + w && s < 1.0 - w) return raw_inner(s, order);

  // Blend h = (1-W)A + W B across the band; A/B are the pieces on the low/
  // high side of the band.
  double t, a0, a1, a2, a3, b0, b1, b2, b3;
  if (s <= -1.0 + w) {
    t = (s + 1.0) / w;
    a0 = outer_left(0), a1 = a2 = a3 = 0.0;
    b0 = raw_inner(s, 0), b1 = raw_inner(s, 1), b2 = raw_inner(s, 2),
    b3 = raw_inner(s, 3);
  } else {
    t = (s - (1.0 - w)) / w;
    a0 = raw_inner(s, 0), a1 = raw_inner(s, 1), a2 = raw_inner(s, 2),
    a3 = raw_inner(s, 3);
    b0 = outer_right(0), b1 = b2 = b3 = 0.0;
  }
  const double W = smoothstep(t, 0);
  const double W1 = smoothstep(t, 1) / w;
  const double W2 = smoothstep(t, 2) / (w * w);
  const double W3 = smoothstep(t, 3) / (w * w * w);
  switch (order) {
    case 0: return (1.0 - W) * a0 + W * b0;
    case 1: return W1 * (b0 - a0) + (1.0 - W) * a1 + W * b1;
    case 2: return W2 * (b0 - a0) + 2.0 * W1 * (b1 - a1) + (1.0 - W) * a2 + W * b2;
    default:
      return W3 * (b0 - a0) + 3.0 * W2 * (b1 - a1) + 3.0 * W1 * (b2 - a2) +
             (1.0 - W) * a3 + W * b3;
  }
}

double InterpolationH::derivative_sup(int order) const {
  require(order >= 0 && order <= 3, ErrorKind::invalid_argument,
          "derivative_sup: order must be in 0..3");
  return sup_[order];
}

void InterpolationH::eval_nodal(const Vec& s, int order, Vec& out) const {
  out.resize(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = eval(s[i], order);
}

double h_eval(const InterpolationH& h, double s, int order) {
  return h.eval(s, order);
}

}  // namespace chb
