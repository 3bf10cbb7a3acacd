#pragma once

#include "core/assembly.hpp"
#include "core/common.hpp"

namespace surfsup {

struct EigResult {
  VecX eigenvalues;   // ascending
  MatX eigenvectors;  // one column per eigenvalue
  int iterations = 0;
  double residual = 0.0;  // max over pairs of ||G w - lambda N w|| / ||N w||
  bool converged = true;
  bool used_dense = false;
};

/// Smallest k eigenpairs of the dense symmetric-definite pencil (A, B),
/// B SPD. LAPACK dsygvx under the hood; A and B are taken by value because
/// the factorization overwrites them.
EigResult dense_gevp_smallest(MatX A, MatX B, int k);

/// Schur-complement pencil  (C M^{-1} C^T + P) w = lambda N w  with M SPD
/// on the velocity space, P sparse PSD on the multiplier space, and N the
/// multiplier norm. `deflate` columns span directions the solve is
/// restricted against (N-orthogonal complement), e.g. the constant for
/// zero-mean multiplier spaces.
struct SchurPencil {
  const SpMat* M = nullptr;
  const SpMat* C = nullptr;
  SpMat P;
  const MultiplierNorm* N = nullptr;
  MatX deflate;

  int velocity_dofs() const { return static_cast<int>(M->rows()); }
  int multiplier_dofs() const { return static_cast<int>(C->rows()); }

  VecX apply_schur(const VecX& w) const;  // factorizes M per call; test use
};

struct LanczosOptions {
  int max_iterations = 400;
  double residual_tol = 1e-9;     // Ritz estimate target
  double shift_fraction = 1e-3;   // shift = fraction * scale estimate
  unsigned seed = 0x5eed5u;
};

/// Smallest k eigenpairs of the pencil via shift-invert Lanczos in the
/// N-inner product. One sparse LDLT of the quasi-definite block
/// [[M, C^T], [C, -(P + s N_sp)]] plus a low-rank Woodbury correction for
/// the norm's dense part.
EigResult lanczos_smallest(const SchurPencil& pencil, int k,
                           const LanczosOptions& opts = {});

/// Dense route: forms the Schur complement column-block-wise and calls
/// dsygvx; deflation directions are removed with Householder reflectors.
EigResult dense_smallest(const SchurPencil& pencil, int k);

/// Power-iteration estimate of the largest pencil eigenvalue (used for the
/// numerically-zero classification threshold).
double estimate_largest(const SchurPencil& pencil, int iterations = 20);

}  // namespace surfsup
