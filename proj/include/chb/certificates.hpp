#pragma once

#include <map>
#include <optional>
#include <string>

#include "chb/control.hpp"

namespace chb {

enum class Provenance { configured, estimated };

struct ConstantValue {
  double value = 0.0;
  Provenance provenance = Provenance::configured;
};

struct ConditionResult {
  std::string name;
  double left = 0.0;
  double right = 0.0;
  bool satisfied = false;
  bool strict = false;
};

/// Evaluated sides of the globality and uniqueness conditions plus the
/// constants that went into them.  All certificates are heuristic: the
/// Lipschitz and Sobolev constants are sampled lower bounds, and the report
/// carries provenance tags so nothing is over-claimed.
struct CertificateReport {
  std::vector<ConditionResult> conditions;
  std::map<std::string, ConstantValue> constants;
  std::string psi3_path;  // "observed_range" or "smoothed_bound"
  std::optional<double> uniqueness_time_bound_value;
  double configured_T = 0.0;
  bool time_bound_satisfied = false;
};

struct CertifyConstants {
  std::optional<ConstantValue> L1;     // state Lipschitz constant
  std::optional<ConstantValue> L3;     // costate Lipschitz constant
  std::optional<ConstantValue> c_p;    // Sobolev constant, exponent p
  std::optional<ConstantValue> c_q;    // Sobolev constant, exponent q
  std::optional<ConstantValue> theta;  // free parameter of the second set
};

/// Discrete surrogates of both sides of the globality conditions evaluated
/// from a stationary control's state and costate.  Fails with
/// missing_constants when the first condition is requested without L1.
CertificateReport certify_global(const ReducedProblem& problem,
                                 const ControlField& u,
                                 const ReducedProblem::Evaluated& at,
                                 const CertifyConstants& constants);

/// Right-hand side of the small-time uniqueness condition
///   T < ( sqrt(3) kappa / (2 (sqrt(2) L1 c_p c_q
///         + L3 |phi_a| |h'|_inf)) )^(4/3).
/// Returns +infinity when the denominator vanishes.
double uniqueness_time_bound(double kappa, double L1, double L3,
                             double phi_costate_norm, double c_p, double c_q,
                             double h_prime_sup);

enum class LipschitzKind { state, costate };
enum class LipschitzNorm { phi_l2l2, all_fields_l2l2 };

/// Max sampled difference quotient of the control-to-state or
/// control-to-costate map over admissible pairs; an estimated lower bound of
/// the true constant.  Sampling is nested: growing n_pairs only adds pairs.
double estimate_lipschitz(const ReducedProblem& problem,
                          const ControlField& box_template, LipschitzKind kind,
                          int n_pairs, std::uint64_t seed,
                          LipschitzNorm norm = LipschitzNorm::phi_l2l2);

/// Estimated lower bound of the embedding constant |v|_Lp <= c |v|_H1 by
/// gradient ascent on the discrete Rayleigh quotient (lumped-mass Lp and H1
/// surrogates) from several random starts.
double estimate_sobolev_constant(const Discretization& d, double p,
                                 int n_starts = 20, std::uint64_t seed = 0);

std::string format_certificate_report(const CertificateReport& report);

}  // namespace chb
