#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "core/assembly.hpp"
#include "core/common.hpp"
#include "core/eigensolve.hpp"
#include "core/geometry.hpp"
#include "core/mesh.hpp"

namespace surfsup {

enum class FormKind { b_only, c_full };
enum class VelocityConstraint { none, tangential };
enum class MultiplierSpace { l2, l2_zero_mean };

/// One inf-sup setting: which constraint form, which velocity space, which
/// multiplier space and norm, and the stabilization weight.
struct InfSupProblem {
  FormKind form = FormKind::b_only;
  VelocityConstraint velocity = VelocityConstraint::none;
  MultiplierSpace multiplier_space = MultiplierSpace::l2;
  MultiplierNormKind multiplier_norm = MultiplierNormKind::plain_l2;
  double delta_s = 0.0;

  int dense_threshold = 3000;  // dense eigensolve when multiplier dofs fit
  int extra_eigenvalues = 3;
  int max_iterations = 400;
  double residual_tol = 1e-8;
  unsigned seed = 0x5eed5u;
};

struct SpectrumResult {
  double constant = 0.0;  // sqrt of the smallest non-kernel eigenvalue
  double lambda_min = 0.0;
  VecX eigenvector;  // multiplier coordinates (xi, then q if present)
  std::vector<double> next_eigenvalues;
  int kernel_dim = 0;  // numerically-zero modes matching the declared kernel
  double lambda_max_estimate = 0.0;

  double h = 0.0;
  int dof_v = 0;
  int dof_q = 0;  // multiplier dofs (xi count + 1 when q is present)
  int iterations = 0;
  double residual = 0.0;
  bool used_dense = true;

  // N-angle (degrees) of the eigenvector to the pair (-1, Hbar); only set
  // for the c-form on constant-curvature surfaces.
  double null_angle_deg = std::numeric_limits<double>::quiet_NaN();
};

SpectrumResult infsup_constant(const InfSupProblem& problem,
                               const FeOperators& ops,
                               const GeometryData& geo, const TriMesh& mesh);

/// Same eigenproblem with the stabilization term active; requires
/// delta_s > 0 (the multiplier space is continuous P1 by construction).
SpectrumResult stabilized_infsup(const InfSupProblem& problem,
                                 const FeOperators& ops,
                                 const GeometryData& geo,
                                 const TriMesh& mesh);

double multiplier_angle_deg(const MultiplierNorm& N, const VecX& a,
                            const VecX& b);

/// The constant-curvature null pair (-1, Hbar) in multiplier coordinates.
VecX sphere_null_pair(const FeOperators& ops);

// --- refinement sweeps ------------------------------------------------------

struct SweepRow {
  int level = 0;
  double h = std::numeric_limits<double>::quiet_NaN();
  int dof_v = 0;
  int dof_q = 0;
  double constant = std::numeric_limits<double>::quiet_NaN();
  int kernel_dim = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string error;
};

struct ConvergenceTable {
  std::vector<SweepRow> rows;

  // provenance, stamped on every emitted table
  std::string surface;
  std::string form;
  std::string velocity;
  std::string space;
  std::string norm;
  std::string ell_policy;  // "auto" or the fixed value
  double delta_s = 0.0;
  unsigned seed = 0;
  std::string version = kVersion;

  void write_csv(std::ostream& os) const;
  std::string to_json() const;  // schema 1
};

ConvergenceTable h_sweep(const InfSupProblem& problem, SurfaceKind kind,
                         const ShapeParams& params,
                         const std::vector<int>& levels, double ell = 0.0,
                         std::size_t vertex_cap = kDefaultVertexCap);

const char* form_name(FormKind f);
const char* velocity_name(VelocityConstraint v);
const char* space_name(MultiplierSpace s);
const char* norm_name(MultiplierNormKind n);

}  // namespace surfsup
