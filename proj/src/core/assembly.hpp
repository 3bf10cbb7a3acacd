#pragma once

#include <string>

#include "core/common.hpp"
#include "core/geometry.hpp"
#include "core/mesh.hpp"

namespace surfsup {

SpMat assemble_scalar_mass(const TriMesh& mesh);
SpMat assemble_scalar_stiffness(const TriMesh& mesh);

/// Every bilinear form of the P1 surface discretization. Vector dofs are
/// vertex-major, component-minor: dof = 3 * vertex + component.
struct FeOperators {
  // scalar forms (V x V)
  SpMat M;    // mass
  SpMat K;    // Laplace-Beltrami stiffness
  SpMat S;    // stabilization  sum_K h_K^2 (local stiffness)
  SpMat M_H;  // curvature-weighted mass  int H psi_i psi_j

  // vector forms (3V x 3V), componentwise surface gradients
  SpMat M_vec, K_vec;
  SpMat M_X;  // velocity norm matrix  M_vec + ell^2 K_vec

  // divergence form, row = multiplier vertex, col = velocity dof:
  // B(j, dof(i,c)) = int psi_j d_c^Gamma phi_i
  SpMat B;

  // normal coupling g[dof] = int phi_dof . n  (per-face normals)
  VecX g;

  // integrals of the scalar basis, a = M * 1
  VecX basis_integrals;

  double area = 0.0;
  double ell = 0.0;
  double mean_H = 0.0;
  int n_vertices = 0;

  int scalar_dofs() const { return n_vertices; }
  int vector_dofs() const { return 3 * n_vertices; }
};

void assemble_basic(const TriMesh& mesh, FeOperators& ops);
void assemble_divergence(const TriMesh& mesh, const GeometryData& geo,
                         FeOperators& ops);
void assemble_norms(const GeometryData& geo, FeOperators& ops);
void assemble_stabilization(const TriMesh& mesh, FeOperators& ops);
void assemble_curvature_mass(const TriMesh& mesh, const GeometryData& geo,
                             FeOperators& ops);

/// Assembles the full operator set in one pass.
FeOperators assemble_operators(const TriMesh& mesh, const GeometryData& geo);

enum class MultiplierNormKind { plain_l2, lemma1 };

/// Quadratic norm on the multiplier space, with or without the volume
/// multiplier q appended as the last dof.
///
///   plain_l2:  ||xi||_0^2            (+ ell^4 q^2 when q is present)
///   lemma1:    ||xi - mean||_0^2 + ell^4 (Hbar mean + q)^2 + ell^2 mean^2
///
/// Stored as an SPD sparse part plus a low-rank correction,
/// N = N_sp + U D U^T, so that shifted factorizations stay sparse.
struct MultiplierNorm {
  MultiplierNormKind kind = MultiplierNormKind::plain_l2;
  bool has_q = false;
  int dim = 0;

  SpMat N_sp;  // SPD
  MatX U;      // dim x r, r in {0, 1, 2}
  MatX D;      // r x r symmetric

  VecX apply(const VecX& w) const {
    VecX y = N_sp * w;
    if (U.cols() > 0) y.noalias() += U * (D * (U.transpose() * w));
    return y;
  }
  double inner(const VecX& u, const VecX& w) const { return u.dot(apply(w)); }
  double norm(const VecX& w) const {
    return std::sqrt(std::max(0.0, inner(w, w)));
  }
  MatX dense() const {
    MatX N = MatX(N_sp);
    if (U.cols() > 0) N += U * D * U.transpose();
    return N;
  }
};

MultiplierNorm make_multiplier_norm(MultiplierNormKind kind, bool has_q,
                                    const FeOperators& ops);

/// Per-vertex orthonormal tangent pair as a sparse 3V x 2V basis matrix;
/// congruent transforms with it impose the strong tangential constraint.
SpMat tangent_basis(const GeometryData& geo);

void write_matrix_market(const SpMat& A, const std::string& path);

}  // namespace surfsup
