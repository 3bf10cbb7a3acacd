#include "core/eigensolve.hpp"

#include <lapacke.h>

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace surfsup {

namespace {

// ---------------------------------------------------------------------------
// deterministic start vectors

VecX seeded_gaussian(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return (rng() >> 11) * 0x1.0p-53; };
  VecX v(n);
  for (int i = 0; i < n; i += 2) {
    const double u1 = std::max(uniform(), 1e-300), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < n) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  return v;
}

// ---------------------------------------------------------------------------
// solver for the multiplier norm, N = N_sp + U D U^T

struct NormSolver {
  Eigen::SimplicialLLT<SpMat> llt;
  MatX Y;    // N_sp^{-1} U
  MatX cap;  // (I + U^T Y D)^{-1}, stored explicitly (r <= 2)
  const MultiplierNorm* N = nullptr;

  explicit NormSolver(const MultiplierNorm& norm) : N(&norm) {
    llt.compute(norm.N_sp);
    require(llt.info() == Eigen::Success, ErrorCode::internal,
            "multiplier norm factorization failed");
    if (norm.U.cols() > 0) {
      Y = llt.solve(norm.U);
      const MatX small =
          MatX::Identity(norm.U.cols(), norm.U.cols()) +
          norm.U.transpose() * Y * norm.D;
      cap = small.inverse();
    }
  }

  VecX solve(const VecX& b) const {
    VecX y = llt.solve(b);
    if (N->U.cols() > 0)
      y.noalias() -= Y * (N->D * (cap * (N->U.transpose() * y)));
    return y;
  }
};

// ---------------------------------------------------------------------------
// shifted block solver:  x = (G + s N)^{-1} b  with
// G = C M^{-1} C^T + P, through the quasi-definite matrix
//   W0 = [[M, C^T], [C, -(P + s N_sp)]]
// and a Woodbury correction for the -s U D U^T part of the (1,1) block.

struct ShiftedBlockSolver {
  int n = 0, m = 0;
  double shift = 0.0;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  MatX Yw;     // W0^{-1} Uhat
  MatX Gsm;    // -s D
  MatX capw;   // (I + Uhat^T Yw Gsm)^{-1}
  const MultiplierNorm* N = nullptr;

  ShiftedBlockSolver(const SpMat& M, const SpMat& C, const SpMat& P,
                     const MultiplierNorm& norm, double s)
      : n(static_cast<int>(M.rows())), m(static_cast<int>(C.rows())),
        shift(s), N(&norm) {
    std::vector<Triplet> t;
    t.reserve(M.nonZeros() + 2 * C.nonZeros() + P.nonZeros() +
              norm.N_sp.nonZeros());
    for (int k = 0; k < M.outerSize(); ++k)
      for (SpMat::InnerIterator it(M, k); it; ++it)
        t.emplace_back(static_cast<int>(it.row()),
                       static_cast<int>(it.col()), it.value());
    for (int k = 0; k < C.outerSize(); ++k)
      for (SpMat::InnerIterator it(C, k); it; ++it) {
        t.emplace_back(n + static_cast<int>(it.row()),
                       static_cast<int>(it.col()), it.value());
        t.emplace_back(static_cast<int>(it.col()),
                       n + static_cast<int>(it.row()), it.value());
      }
    auto add_block11 = [&](const SpMat& A, double scale) {
      for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
          t.emplace_back(n + static_cast<int>(it.row()),
                         n + static_cast<int>(it.col()),
                         scale * it.value());
    };
    if (P.nonZeros() > 0) add_block11(P, -1.0);
    add_block11(norm.N_sp, -s);

    SpMat W0(n + m, n + m);
    W0.setFromTriplets(t.begin(), t.end());
    W0.makeCompressed();
    ldlt.compute(W0);
    require(ldlt.info() == Eigen::Success, ErrorCode::solver,
            "block factorization for the shifted pencil failed");

    if (norm.U.cols() > 0) {
      MatX Uhat = MatX::Zero(n + m, norm.U.cols());
      Uhat.bottomRows(m) = norm.U;
      Yw = ldlt.solve(Uhat);
      Gsm = -s * norm.D;
      const MatX small =
          MatX::Identity(norm.U.cols(), norm.U.cols()) +
          Uhat.transpose() * Yw * Gsm;
      capw = small.inverse();
    }
  }

  // x = (G + s N)^{-1} b, b in multiplier space
  VecX solve(const VecX& b) const {
    VecX rhs = VecX::Zero(n + m);
    rhs.tail(m) = -b;
    VecX z = ldlt.solve(rhs);
    if (N->U.cols() > 0) {
      const VecX corr =
          Gsm * (capw * (N->U.transpose() * z.tail(m)));
      z.noalias() -= Yw * corr;
    }
    return z.tail(m);
  }
};

// ---------------------------------------------------------------------------
// Householder deflation used by the dense route

struct Reflector {
  VecX h;
  double tau = 0.0;
  void apply(VecX& x) const { x -= (tau * h.dot(x)) * h; }
  void apply_both_sides(MatX& A) const {
    const VecX w = tau * (A.selfadjointView<Eigen::Lower>() * h);
    A -= w * h.transpose() + h * w.transpose() -
         (tau * h.dot(w)) * h * h.transpose();
    // keep it exactly symmetric for the factorizations downstream
    A = 0.5 * (A + A.transpose()).eval();
  }
};

Reflector make_reflector(const VecX& u, int pivot) {
  Reflector r;
  r.h = u;
  const double alpha = u.norm() * (u[pivot] >= 0 ? -1.0 : 1.0);
  r.h[pivot] -= alpha;
  const double hn2 = r.h.squaredNorm();
  r.tau = hn2 > 0 ? 2.0 / hn2 : 0.0;
  return r;
}

}  // namespace

VecX SchurPencil::apply_schur(const VecX& w) const {
  Eigen::SimplicialLLT<SpMat> llt(*M);
  require(llt.info() == Eigen::Success, ErrorCode::assembly,
          "velocity norm matrix is not SPD");
  const VecX rhs = C->transpose() * w;
  VecX y = (*C) * llt.solve(rhs).eval();
  if (P.nonZeros() > 0) y.noalias() += P * w;
  return y;
}

EigResult dense_gevp_smallest(MatX A, MatX B, int k) {
  const auto n = static_cast<lapack_int>(A.rows());
  require(A.rows() == A.cols() && B.rows() == n && B.cols() == n,
          ErrorCode::invalid_argument, "pencil matrices must be square");
  k = std::min<int>(k, static_cast<int>(n));

  VecX w(n);
  MatX Z(n, k);
  std::vector<lapack_int> ifail(n);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsygvx(
      LAPACK_COL_MAJOR, 1, 'V', 'I', 'L', n, A.data(), n, B.data(), n, 0.0,
      0.0, 1, k, 2.0 * LAPACKE_dlamch('S'), &found, w.data(), Z.data(), n,
      ifail.data());
  require(info == 0, ErrorCode::solver,
          "dsygvx failed with info " + std::to_string(info));
  require(found >= k, ErrorCode::solver, "dsygvx found too few eigenvalues");

  EigResult res;
  res.eigenvalues = w.head(k);
  res.eigenvectors = Z.leftCols(k);
  res.used_dense = true;
  return res;
}

EigResult dense_smallest(const SchurPencil& pencil, int k) {
  const int m = pencil.multiplier_dofs();
  Eigen::SimplicialLLT<SpMat> Mllt(*pencil.M);
  require(Mllt.info() == Eigen::Success, ErrorCode::assembly,
          "velocity norm matrix is not SPD");

  MatX G = pencil.P.nonZeros() > 0 ? MatX(pencil.P) : MatX::Zero(m, m);
  const SpMat Ct = pencil.C->transpose();
  const int block = 256;
  for (int j0 = 0; j0 < m; j0 += block) {
    const int nb = std::min(block, m - j0);
    const MatX rhs = MatX(Ct.middleCols(j0, nb));
    const MatX X = Mllt.solve(rhs);
    G.middleCols(j0, nb) += (*pencil.C) * X;
  }
  G = 0.5 * (G + G.transpose()).eval();
  MatX Nd = pencil.N->dense();

  // restrict to the complement of the deflation directions
  const int d = static_cast<int>(pencil.deflate.cols());
  std::vector<Reflector> refl;
  for (int i = 0; i < d; ++i) {
    VecX u = pencil.N->apply(pencil.deflate.col(i));
    for (const auto& r : refl) r.apply(u);
    refl.push_back(make_reflector(u, i));
    refl.back().apply_both_sides(G);
    refl.back().apply_both_sides(Nd);
  }

  EigResult red = dense_gevp_smallest(G.bottomRightCorner(m - d, m - d),
                                      Nd.bottomRightCorner(m - d, m - d), k);

  EigResult res;
  res.eigenvalues = red.eigenvalues;
  res.eigenvectors = MatX::Zero(m, red.eigenvectors.cols());
  res.eigenvectors.bottomRows(m - d) = red.eigenvectors;
  for (int c = 0; c < res.eigenvectors.cols(); ++c) {
    VecX v = res.eigenvectors.col(c);
    for (auto it = refl.rbegin(); it != refl.rend(); ++it) it->apply(v);
    res.eigenvectors.col(c) = v;
  }
  res.used_dense = true;

  // true residuals, measured inside the constrained subspace
  double worst = 0.0;
  for (int c = 0; c < res.eigenvectors.cols(); ++c) {
    const VecX wv = res.eigenvectors.col(c);
    VecX r = (*pencil.C) * Mllt.solve((Ct * wv).eval()).eval();
    if (pencil.P.nonZeros() > 0) r.noalias() += pencil.P * wv;
    const VecX Nw = pencil.N->apply(wv);
    r -= res.eigenvalues[c] * Nw;
    for (int i = 0; i < d; ++i) {
      const VecX u = pencil.N->apply(pencil.deflate.col(i));
      r -= u * (u.dot(r) / u.squaredNorm());
    }
    worst = std::max(worst, r.norm() / std::max(Nw.norm(), 1e-300));
  }
  res.residual = worst;
  return res;
}

double estimate_largest(const SchurPencil& pencil, int iterations) {
  NormSolver ns(*pencil.N);
  Eigen::SimplicialLLT<SpMat> Mllt(*pencil.M);
  require(Mllt.info() == Eigen::Success, ErrorCode::assembly,
          "velocity norm matrix is not SPD");
  const SpMat Ct = pencil.C->transpose();
  auto apply_G = [&](const VecX& w) {
    VecX y = (*pencil.C) * Mllt.solve((Ct * w).eval()).eval();
    if (pencil.P.nonZeros() > 0) y.noalias() += pencil.P * w;
    return y;
  };
  VecX w = seeded_gaussian(pencil.multiplier_dofs(), 0x1a57u);
  w /= pencil.N->norm(w);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const VecX gw = apply_G(w);
    lambda = w.dot(gw);
    w = ns.solve(gw);
    const double nn = pencil.N->norm(w);
    if (nn < 1e-300) break;
    w /= nn;
  }
  return lambda;
}

EigResult lanczos_smallest(const SchurPencil& pencil, int k,
                           const LanczosOptions& opts) {
  const int m = pencil.multiplier_dofs();
  const int want = std::min(m, k);
  const int buffer = std::min(m, want + 4);

  Eigen::SimplicialLLT<SpMat> Mllt(*pencil.M);
  require(Mllt.info() == Eigen::Success, ErrorCode::assembly,
          "velocity norm matrix is not SPD");
  const SpMat Ct = pencil.C->transpose();
  auto apply_G = [&](const VecX& w) {
    VecX y = (*pencil.C) * Mllt.solve((Ct * w).eval()).eval();
    if (pencil.P.nonZeros() > 0) y.noalias() += pencil.P * w;
    return y;
  };

  // scale-aware shift: a random Rayleigh quotient sits inside the spectrum
  VecX probe = seeded_gaussian(m, opts.seed ^ 0x9e3779b9u);
  probe /= pencil.N->norm(probe);
  const double scale = std::abs(probe.dot(apply_G(probe))) + 1e-300;
  const double s = std::max(opts.shift_fraction * scale, 1e-14 * scale);

  ShiftedBlockSolver solver(*pencil.M, *pencil.C, pencil.P, *pencil.N, s);

  const int d = static_cast<int>(pencil.deflate.cols());
  auto project = [&](VecX& w) {
    for (int i = 0; i < d; ++i) {
      const VecX& z = pencil.deflate.col(i);
      w -= z * (pencil.N->inner(z, w) / pencil.N->inner(z, z));
    }
  };

  const int maxit = std::min(opts.max_iterations, m);
  std::vector<VecX> V;
  V.reserve(maxit + 1);
  std::vector<double> alpha, beta;

  VecX v = seeded_gaussian(m, opts.seed);
  project(v);
  v /= pencil.N->norm(v);
  V.push_back(v);

  MatX ritz_vecs;
  VecX ritz_vals;
  int iters = 0;
  bool converged = false;

  for (int j = 0; j < maxit; ++j) {
    iters = j + 1;
    VecX u = solver.solve(pencil.N->apply(V[j]));
    project(u);
    const double a = pencil.N->inner(u, V[j]);
    alpha.push_back(a);
    u -= a * V[j];
    if (j > 0) u -= beta[j - 1] * V[j - 1];
    // full reorthogonalization, two passes
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& vi : V) u -= pencil.N->inner(u, vi) * vi;
    const double b = pencil.N->norm(u);
    beta.push_back(b);

    const bool breakdown = b < 1e-13;
    if (!breakdown) V.push_back(u / b);

    if ((j + 1) % 5 == 0 || breakdown || j + 1 == maxit) {
      const int jj = j + 1;
      MatX T = MatX::Zero(jj, jj);
      for (int i = 0; i < jj; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < jj) T(i + 1, i) = T(i, i + 1) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<MatX> es(T);
      const int have = std::min(buffer, jj);
      bool ok = jj >= want;
      for (int t = 0; t < std::min(want, jj) && ok; ++t) {
        const int col = jj - 1 - t;  // largest thetas
        const double theta = es.eigenvalues()[col];
        const double est =
            std::abs(beta[jj - 1] * es.eigenvectors()(jj - 1, col));
        if (theta <= 0 || est > opts.residual_tol * std::abs(theta))
          ok = false;
      }
      if (ok || breakdown || j + 1 == maxit) {
        const int take = std::min(have, jj);
        ritz_vals.resize(take);
        ritz_vecs.resize(m, take);
        for (int t = 0; t < take; ++t) {
          const int col = jj - 1 - t;
          ritz_vals[t] = es.eigenvalues()[col];
          VecX w = VecX::Zero(m);
          for (int i = 0; i < jj; ++i)
            w += es.eigenvectors()(i, col) * V[i];
          ritz_vecs.col(t) = w;
        }
        converged = ok;
        if (ok || breakdown) break;
      }
    }
  }

  require(ritz_vals.size() > 0, ErrorCode::solver,
          "Lanczos produced no Ritz pairs");

  int got = std::min<int>(want, static_cast<int>(ritz_vals.size()));
  while (got > 0 && ritz_vals[got - 1] <= 0) --got;  // drop spurious Ritz
  require(got > 0, ErrorCode::solver, "Lanczos found no positive Ritz values");
  EigResult res;
  res.eigenvalues.resize(got);
  res.eigenvectors.resize(m, got);
  double worst = 0.0;
  for (int t = 0; t < got; ++t) {
    const double theta = ritz_vals[t];
    const double lambda = 1.0 / theta - s;
    res.eigenvalues[t] = lambda;
    VecX w = ritz_vecs.col(t);
    w /= pencil.N->norm(w);
    res.eigenvectors.col(t) = w;
    VecX r = apply_G(w);
    const VecX Nw = pencil.N->apply(w);
    r -= lambda * Nw;
    for (int i = 0; i < d; ++i) {
      const VecX u = pencil.N->apply(pencil.deflate.col(i));
      r -= u * (u.dot(r) / u.squaredNorm());
    }
    worst = std::max(worst, r.norm() / std::max(Nw.norm(), 1e-300));
  }
  res.iterations = iters;
  res.residual = worst;
  res.converged = converged;
  return res;
}

}  // namespace surfsup
