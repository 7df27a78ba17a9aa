#pragma once

#include <vector>

#include "chb/grid.hpp"

namespace chb {

/// Space-time control with nodal box bounds; one slice per time step
/// (piecewise constant in time).
struct ControlField {
  GridPtr grid;
  double dt = 0;
  int n_steps = 0;
  std::vector<Vec> values;
  std::vector<Vec> lower;
  std::vector<Vec> upper;

  static ControlField zeros(GridPtr grid, double dt, int n_steps,
                            double lower_bound, double upper_bound);

  void validate() const;
  bool in_box(double tol = 1e-12) const;
};

/// Tracking weights and targets: terminal target phi_f, running target phi_d
/// per time level, control cost weight kappa.
struct Objective {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double kappa = 0.0;
  Vec phi_f;                  // terminal target
  std::vector<Vec> phi_d;     // per level 0..n_steps

  void validate(int n_nodes, int n_levels) const;
};

}  // namespace chb
