#include "core/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "core/fe_local.hpp"

namespace surfsup {

namespace {

template <typename Fn>
void for_each_frame(const TriMesh& mesh, Fn&& fn) {
  for (int f = 0; f < mesh.face_count(); ++f) {
    const TriFrame frame =
        tri_frame(mesh.vertices.row(mesh.faces(f, 0)),
                  mesh.vertices.row(mesh.faces(f, 1)),
                  mesh.vertices.row(mesh.faces(f, 2)));
    fn(f, frame);
  }
}

SpMat from_triplets(int rows, int cols, std::vector<Triplet>& t) {
  SpMat A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

}  // namespace

SpMat assemble_scalar_mass(const TriMesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.face_count());
  for_each_frame(mesh, [&](int f, const TriFrame& fr) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        t.emplace_back(mesh.faces(f, i), mesh.faces(f, j),
                       local_mass(fr, i, j));
  });
  return from_triplets(mesh.vertex_count(), mesh.vertex_count(), t);
}

SpMat assemble_scalar_stiffness(const TriMesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.face_count());
  for_each_frame(mesh, [&](int f, const TriFrame& fr) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        t.emplace_back(mesh.faces(f, i), mesh.faces(f, j),
                       fr.area * fr.grad[i].dot(fr.grad[j]));
  });
  return from_triplets(mesh.vertex_count(), mesh.vertex_count(), t);
}

void assemble_basic(const TriMesh& mesh, FeOperators& ops) {
  ops.n_vertices = mesh.vertex_count();
  ops.M = assemble_scalar_mass(mesh);
  ops.K = assemble_scalar_stiffness(mesh);
  ops.basis_integrals = ops.M * VecX::Ones(ops.n_vertices);
  ops.area = ops.basis_integrals.sum();

  // componentwise copies on the vector space
  std::vector<Triplet> tm, tk;
  tm.reserve(27 * mesh.face_count());
  tk.reserve(27 * mesh.face_count());
  for_each_frame(mesh, [&](int f, const TriFrame& fr) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double m = local_mass(fr, i, j);
        const double k = fr.area * fr.grad[i].dot(fr.grad[j]);
        for (int c = 0; c < 3; ++c) {
          tm.emplace_back(3 * mesh.faces(f, i) + c, 3 * mesh.faces(f, j) + c,
                          m);
          tk.emplace_back(3 * mesh.faces(f, i) + c, 3 * mesh.faces(f, j) + c,
                          k);
        }
      }
  });
  ops.M_vec = from_triplets(3 * ops.n_vertices, 3 * ops.n_vertices, tm);
  ops.K_vec = from_triplets(3 * ops.n_vertices, 3 * ops.n_vertices, tk);
}

void assemble_divergence(const TriMesh& mesh, const GeometryData& geo,
                         FeOperators& ops) {
  std::vector<Triplet> tb;
  tb.reserve(27 * mesh.face_count());
  ops.g = VecX::Zero(3 * mesh.vertex_count());
  for_each_frame(mesh, [&](int f, const TriFrame& fr) {
    const double third = fr.area / 3.0;
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 3; ++c) {
        const double div_ic = fr.grad[i][c];  // d_c of phi_i on this face
        for (int j = 0; j < 3; ++j)
          tb.emplace_back(mesh.faces(f, j), 3 * mesh.faces(f, i) + c,
                          third * div_ic);
        ops.g[3 * mesh.faces(f, i) + c] += third * geo.face_normals(f, c);
      }
  });
  ops.B = from_triplets(mesh.vertex_count(), 3 * mesh.vertex_count(), tb);
}

void assemble_norms(const GeometryData& geo, FeOperators& ops) {
  ops.ell = geo.length_scale;
  ops.mean_H = geo.mean_H;
  ops.M_X = ops.M_vec + geo.length_scale * geo.length_scale * ops.K_vec;
}

void assemble_stabilization(const TriMesh& mesh, FeOperators& ops) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.face_count());
  for_each_frame(mesh, [&](int f, const TriFrame& fr) {
    const double h2 = fr.h * fr.h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        t.emplace_back(mesh.faces(f, i), mesh.faces(f, j),
                       h2 * fr.area * fr.grad[i].dot(fr.grad[j]));
  });
  ops.S = from_triplets(mesh.vertex_count(), mesh.vertex_count(), t);
}

void assemble_curvature_mass(const TriMesh& mesh, const GeometryData& geo,
                             FeOperators& ops) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.face_count());
  const std::array<std::array<double, 3>, 3> basis{
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for_each_frame(mesh, [&](int f, const TriFrame& fr) {
    const std::array<double, 3> h{geo.vertex_H[mesh.faces(f, 0)],
                                  geo.vertex_H[mesh.faces(f, 1)],
                                  geo.vertex_H[mesh.faces(f, 2)]};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        t.emplace_back(mesh.faces(f, i), mesh.faces(f, j),
                       integrate_p1_product(fr, basis[i], basis[j], h));
  });
  ops.M_H = from_triplets(mesh.vertex_count(), mesh.vertex_count(), t);
}

FeOperators assemble_operators(const TriMesh& mesh, const GeometryData& geo) {
  FeOperators ops;
  assemble_basic(mesh, ops);
  assemble_divergence(mesh, geo, ops);
  assemble_norms(geo, ops);
  assemble_stabilization(mesh, ops);
  assemble_curvature_mass(mesh, geo, ops);
  return ops;
}

MultiplierNorm make_multiplier_norm(MultiplierNormKind kind, bool has_q,
                                    const FeOperators& ops) {
  MultiplierNorm n;
  n.kind = kind;
  n.has_q = has_q;
  const int nv = ops.scalar_dofs();
  n.dim = nv + (has_q ? 1 : 0);
  const double ell2 = ops.ell * ops.ell;
  const double ell4 = ell2 * ell2;

  // SPD sparse part: the scalar mass, plus the exact ell^4 q^2 diagonal
  std::vector<Triplet> t;
  t.reserve(ops.M.nonZeros() + 1);
  for (int k = 0; k < ops.M.outerSize(); ++k)
    for (SpMat::InnerIterator it(ops.M, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                     it.value());
  if (has_q) t.emplace_back(nv, nv, ell4);
  n.N_sp = from_triplets(n.dim, n.dim, t);

  if (kind == MultiplierNormKind::lemma1) {
    // mean functional: a^T w = mean(xi)
    VecX a = VecX::Zero(n.dim);
    a.head(nv) = ops.basis_integrals / ops.area;
    const double c_mean = -ops.area + ell4 * ops.mean_H * ops.mean_H + ell2;
    if (has_q) {
      n.U.resize(n.dim, 2);
      n.U.col(0) = a;
      n.U.col(1) = VecX::Unit(n.dim, nv);
      n.D.resize(2, 2);
      n.D << c_mean, ell4 * ops.mean_H, ell4 * ops.mean_H, 0.0;
    } else {
      n.U = a;
      n.D = MatX::Constant(1, 1, c_mean);
    }
  }
  return n;
}

SpMat tangent_basis(const GeometryData& geo) {
  const int nv = static_cast<int>(geo.vertex_normals.rows());
  std::vector<Triplet> t;
  t.reserve(6 * nv);
  for (int v = 0; v < nv; ++v) {
    const Vec3 n = geo.vertex_normals.row(v);
    int k = 0;
    for (int c = 1; c < 3; ++c)
      if (std::abs(n[c]) < std::abs(n[k])) k = c;
    const Vec3 t1 = Vec3::Unit(k).cross(n).normalized();
    const Vec3 t2 = n.cross(t1);
    for (int c = 0; c < 3; ++c) {
      t.emplace_back(3 * v + c, 2 * v + 0, t1[c]);
      t.emplace_back(3 * v + c, 2 * v + 1, t2[c]);
    }
  }
  SpMat T(3 * nv, 2 * nv);
  T.setFromTriplets(t.begin(), t.end());
  T.makeCompressed();
  return T;
}

void write_matrix_market(const SpMat& A, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::io, "cannot write " + path);
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[64];
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n",
                    static_cast<long>(it.row()) + 1,
                    static_cast<long>(it.col()) + 1, it.value());
      os << buf;
    }
  require(os.good(), ErrorCode::io, "write failed: " + path);
}

}  // namespace surfsup
