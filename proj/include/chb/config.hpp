#pragma once

#include <map>
#include <optional>
#include <string>

#include "chb/certificates.hpp"
#include "chb/state.hpp"

namespace chb {

/// Nodal field source: a constant, a CSV snapshot, or a tanh disc profile
/// disc:cx,cy,r,eps (value 1 inside radius r around (cx,cy), -1 outside,
/// interface width eps).
struct FieldSpec {
  enum class Kind { constant, csv, disc };
  Kind kind = Kind::constant;
  double value = 0.0;
  std::string path;
  double cx = 0, cy = 0, radius = 0, eps = 0.1;

  static FieldSpec parse(const std::string& text, const std::string& key);
  std::string serialize() const;
  ScalarField materialize(GridPtr grid, const std::string& base_dir) const;
};

struct ConstantSpec {
  enum class Kind { absent, estimate, value };
  Kind kind = Kind::absent;
  double value = 0.0;

  static ConstantSpec parse(const std::string& text, const std::string& key);
  std::string serialize() const;
};

/// Parsed, validated run configuration.  Unknown keys are rejected; the
/// serialize() form is normalized (sorted keys, all defaults resolved) so
/// parse/serialize round-trips are stable.
struct RunConfig {
  // grid
  int nx = 17, ny = 17;
  double lx = 1.0, ly = 1.0;
  // model parameters (sigma_B resolved separately)
  ModelParams params;
  FieldSpec sigma_B;
  // potential
  Potential::Kind potential_kind = Potential::Kind::double_well;
  double potential_delta = 1.5;
  // interpolation function
  InterpolationH::Variant h_variant = InterpolationH::Variant::linear_clamp;
  double h_width = 0.1;
  // solver
  SolverOptions solver;
  // initial state
  FieldSpec phi0;
  // objective
  double alpha0 = 0.0, alpha1 = 0.0, kappa = 1.0;
  FieldSpec phi_f, phi_d;
  // control
  FieldSpec control_lower, control_upper, control_initial;
  // optimizer
  PGOptions optimizer;
  // verification protocol
  int verify_checks = 5;
  double verify_fd_eps = 1e-4;
  // certificates
  ConstantSpec cert_l1, cert_l3, cert_cp, cert_cq, cert_theta;
  double cert_p = 3.0, cert_q = 6.0;
  int cert_pairs = 3;
  int sobolev_starts = 20;
  // run
  std::uint64_t seed = 0;
  bool reduced_mode = false;  // run.mode = reduced|full
  std::string out_dir = "out";

  std::string base_dir = ".";

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text,
                             const std::string& base_dir);
  std::string serialize() const;

  GridPtr make_grid_ptr() const { return make_grid(nx, ny, lx, ly); }
  ModelParams make_params(GridPtr grid) const;
  Potential make_potential() const;
  InterpolationH make_h() const;
  Objective make_objective(GridPtr grid, int n_steps) const;
  ControlField make_control(GridPtr grid, int n_steps) const;
};

/// Low-level INI-ish parser: [section] headers plus key = value lines,
/// '#' comments.  Returns flat "section.key" -> value.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace chb
