#include "core/infsup.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace surfsup {

namespace {

// kernel eigenvalues must both sit below this fraction of lambda_max and
// align with the declared kernel directions to be excluded
constexpr double kZeroFraction = 1e-10;
constexpr double kKernelAngleDeg = 10.0;

SpMat stack_divergence_and_volume(const FeOperators& ops) {
  std::vector<Triplet> t;
  t.reserve(ops.B.nonZeros() + ops.g.size());
  for (int k = 0; k < ops.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(ops.B, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                     it.value());
  for (int i = 0; i < ops.g.size(); ++i)
    if (ops.g[i] != 0.0)
      t.emplace_back(ops.scalar_dofs(), i, ops.g[i]);
  SpMat C(ops.scalar_dofs() + 1, ops.vector_dofs());
  C.setFromTriplets(t.begin(), t.end());
  C.makeCompressed();
  return C;
}

SpMat pad_stabilization(const SpMat& S, int dim) {
  std::vector<Triplet> t;
  t.reserve(S.nonZeros());
  for (int k = 0; k < S.outerSize(); ++k)
    for (SpMat::InnerIterator it(S, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                     it.value());
  SpMat P(dim, dim);
  P.setFromTriplets(t.begin(), t.end());
  P.makeCompressed();
  return P;
}

}  // namespace

const char* form_name(FormKind f) {
  return f == FormKind::b_only ? "b-only" : "c-full";
}
const char* velocity_name(VelocityConstraint v) {
  return v == VelocityConstraint::none ? "none" : "tangential";
}
const char* space_name(MultiplierSpace s) {
  return s == MultiplierSpace::l2 ? "L2" : "L2_0";
}
const char* norm_name(MultiplierNormKind n) {
  return n == MultiplierNormKind::plain_l2 ? "plain-L2" : "lemma1";
}

double multiplier_angle_deg(const MultiplierNorm& N, const VecX& a,
                            const VecX& b) {
  const double na = N.norm(a), nb = N.norm(b);
  if (na <= 0 || nb <= 0) return std::numeric_limits<double>::quiet_NaN();
  const double c = std::abs(N.inner(a, b)) / (na * nb);
  return std::acos(std::clamp(c, 0.0, 1.0)) * 180.0 / M_PI;
}

VecX sphere_null_pair(const FeOperators& ops) {
  VecX w(ops.scalar_dofs() + 1);
  w.head(ops.scalar_dofs()).setConstant(-1.0);
  w[ops.scalar_dofs()] = ops.mean_H;
  return w;
}

SpectrumResult infsup_constant(const InfSupProblem& problem,
                               const FeOperators& ops,
                               const GeometryData& geo, const TriMesh& mesh) {
  require(problem.delta_s >= 0, ErrorCode::config,
          "stabilization weight must be nonnegative");
  require(!(problem.velocity == VelocityConstraint::tangential &&
            problem.multiplier_space != MultiplierSpace::l2_zero_mean),
          ErrorCode::config,
          "tangential velocities require the zero-mean multiplier space");
  require(!(problem.form == FormKind::c_full &&
            problem.multiplier_space == MultiplierSpace::l2_zero_mean),
          ErrorCode::config,
          "the (xi,q) form is posed over the full L2 multiplier space");

  const bool has_q = problem.form == FormKind::c_full;
  const int m = ops.scalar_dofs() + (has_q ? 1 : 0);

  SpMat C = has_q ? stack_divergence_and_volume(ops) : ops.B;
  SpMat M_v = ops.M_X;
  if (problem.velocity == VelocityConstraint::tangential) {
    const SpMat T = tangent_basis(geo);
    M_v = (T.transpose() * ops.M_X * T).pruned();
    C = (C * T).pruned();
  }

  const MultiplierNorm N =
      make_multiplier_norm(problem.multiplier_norm, has_q, ops);

  SchurPencil pencil;
  pencil.M = &M_v;
  pencil.C = &C;
  pencil.N = &N;
  if (problem.delta_s > 0)
    pencil.P = pad_stabilization(
        SpMat(problem.delta_s * problem.delta_s * ops.S), m);
  if (problem.multiplier_space == MultiplierSpace::l2_zero_mean) {
    pencil.deflate = MatX::Zero(m, 1);
    pencil.deflate.col(0).head(ops.scalar_dofs()).setOnes();
  }

  const int k = 1 + std::max(0, problem.extra_eigenvalues);
  EigResult eig;
  if (m <= problem.dense_threshold) {
    eig = dense_smallest(pencil, k);
  } else {
    LanczosOptions lo;
    lo.max_iterations = problem.max_iterations;
    lo.seed = problem.seed;
    eig = lanczos_smallest(pencil, k, lo);
  }
  require(eig.residual <= problem.residual_tol, ErrorCode::solver,
          "eigensolver did not reach the residual tolerance (residual " +
              std::to_string(eig.residual) + ", " +
              std::to_string(eig.iterations) + " iterations)");

  SpectrumResult res;
  res.lambda_max_estimate = estimate_largest(pencil);
  res.used_dense = eig.used_dense;
  res.iterations = eig.iterations;
  res.residual = eig.residual;
  res.h = geo.h_max;
  res.dof_v = static_cast<int>(M_v.rows());
  res.dof_q = m;

  // declared kernel directions for the numerically-zero classification
  std::vector<VecX> declared;
  if (problem.velocity == VelocityConstraint::tangential &&
      problem.multiplier_space == MultiplierSpace::l2)
    declared.push_back(VecX::Ones(m));
  if (has_q && geo.constant_curvature)
    declared.push_back(sphere_null_pair(ops));

  const double zero_thr = kZeroFraction * std::abs(res.lambda_max_estimate);
  int pick = 0;
  for (; pick < eig.eigenvalues.size() - 1; ++pick) {
    if (eig.eigenvalues[pick] > zero_thr) break;
    bool matches = false;
    for (const auto& z : declared)
      matches = matches || multiplier_angle_deg(N, eig.eigenvectors.col(pick),
                                                z) <= kKernelAngleDeg;
    if (!matches) break;
    ++res.kernel_dim;
  }
  res.lambda_min = eig.eigenvalues[pick];
  res.constant = std::sqrt(std::max(0.0, res.lambda_min));
  res.eigenvector = eig.eigenvectors.col(pick);
  for (int i = pick + 1; i < eig.eigenvalues.size(); ++i)
    res.next_eigenvalues.push_back(eig.eigenvalues[i]);

  if (has_q && geo.constant_curvature)
    res.null_angle_deg =
        multiplier_angle_deg(N, res.eigenvector, sphere_null_pair(ops));

  (void)mesh;
  return res;
}

SpectrumResult stabilized_infsup(const InfSupProblem& problem,
                                 const FeOperators& ops,
                                 const GeometryData& geo,
                                 const TriMesh& mesh) {
  require(problem.delta_s > 0, ErrorCode::config,
          "stabilized_infsup requires delta_s > 0");
  return infsup_constant(problem, ops, geo, mesh);
}

ConvergenceTable h_sweep(const InfSupProblem& problem, SurfaceKind kind,
                         const ShapeParams& params,
                         const std::vector<int>& levels, double ell,
                         std::size_t vertex_cap) {
  require(!levels.empty(), ErrorCode::invalid_argument,
          "sweep needs at least one level");
  for (std::size_t i = 1; i < levels.size(); ++i)
    require(levels[i] > levels[i - 1], ErrorCode::invalid_argument,
            "sweep levels must be strictly increasing");

  ConvergenceTable table;
  table.surface = surface_description(kind, params);
  table.form = form_name(problem.form);
  table.velocity = velocity_name(problem.velocity);
  table.space = space_name(problem.multiplier_space);
  table.norm = norm_name(problem.multiplier_norm);
  table.delta_s = problem.delta_s;
  table.seed = problem.seed;
  if (ell > 0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", ell);
    table.ell_policy = buf;
  } else {
    table.ell_policy = "auto";
  }

  for (int level : levels) {
    SweepRow row;
    row.level = level;
    try {
      const TriMesh mesh = generate_surface(kind, params, level, vertex_cap);
      const GeometryData geo = compute_geometry(mesh, ell);
      const FeOperators ops = assemble_operators(mesh, geo);
      const SpectrumResult r = infsup_constant(problem, ops, geo, mesh);
      row.h = r.h;
      row.dof_v = r.dof_v;
      row.dof_q = r.dof_q;
      row.constant = r.constant;
      row.kernel_dim = r.kernel_dim;
      row.residual = r.residual;
    } catch (const Error& e) {
      row.failed = true;
      row.error = e.what();
    }
    table.rows.push_back(row);
  }
  return table;
}

void ConvergenceTable::write_csv(std::ostream& os) const {
  os << "# surfsup " << version << '\n';
  os << "# surface=" << surface << " form=" << form
     << " velocity=" << velocity << " space=" << space << " norm=" << norm
     << " ell=" << ell_policy << " delta_s=" << delta_s << " seed=" << seed
     << '\n';
  os << "level,h,dof_v,dof_q,constant,kernel_dim,residual\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%d,%d,%.12g,%d,%.3g\n", r.level,
                  r.h, r.dof_v, r.dof_q, r.constant, r.kernel_dim,
                  r.residual);
    os << buf;
  }
}

std::string ConvergenceTable::to_json() const {
  nlohmann::json j;
  j["schema"] = 1;
  j["version"] = version;
  j["surface"] = surface;
  j["form"] = form;
  j["velocity"] = velocity;
  j["space"] = space;
  j["norm"] = norm;
  j["ell"] = ell_policy;
  j["delta_s"] = delta_s;
  j["seed"] = seed;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["level"] = r.level;
    row["h"] = r.h;
    row["dof_v"] = r.dof_v;
    row["dof_q"] = r.dof_q;
    row["constant"] = r.constant;
    row["kernel_dim"] = r.kernel_dim;
    row["residual"] = r.residual;
    if (r.failed) row["error"] = r.error;
    j["rows"].push_back(row);
  }
  return j.dump(2);
}

}  // namespace surfsup
