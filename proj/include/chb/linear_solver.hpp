#pragma once

#include <memory>
#include <mutex>

#include "chb/grid.hpp"

namespace chb {

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool used_direct_fallback = false;
};

/// Preconditioned Krylov solve with a sparse direct fallback.  Symmetric
/// positive definite systems use conjugate gradients with an incomplete
/// Cholesky preconditioner; everything else uses BiCGSTAB with ILUT.  The
/// relative residual of every solve is verified; if the Krylov pass misses
/// the tolerance the system is factorized directly (once, cached) and
/// re-solved.  solve() is reentrant.
class LinearSolver {
 public:
  enum class Kind { spd, general };

  LinearSolver(SpMat A, Kind kind, double tol);

  Vec solve(const Vec& rhs, SolveStats* stats = nullptr) const;
  const SpMat& matrix() const { return A_; }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  SpMat A_;
  Kind kind_;
  double tol_;
};

}  // namespace chb
