#pragma once

#include <array>
#include <cmath>

#include "core/common.hpp"

namespace surfsup {

/// Flat-triangle data used by every element loop: area, unit normal,
/// in-plane P1 basis gradients and the element diameter h_K (longest edge).
struct TriFrame {
  Vec3 p[3];
  Vec3 normal;     // unit, orientation of the face (p1-p0)x(p2-p0)
  double area;
  Vec3 grad[3];    // gradient of barycentric basis i, tangent to the face
  double h;        // longest edge
};

inline TriFrame tri_frame(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  TriFrame f;
  f.p[0] = p0;
  f.p[1] = p1;
  f.p[2] = p2;
  const Vec3 n = (p1 - p0).cross(p2 - p0);
  const double n2 = n.norm();
  f.area = 0.5 * n2;
  f.normal = n2 > 0 ? Vec3(n / n2) : Vec3::Zero();
  const double inv2a = n2 > 0 ? 1.0 / n2 : 0.0;
  f.grad[0] = f.normal.cross(p2 - p1) * inv2a;
  f.grad[1] = f.normal.cross(p0 - p2) * inv2a;
  f.grad[2] = f.normal.cross(p1 - p0) * inv2a;
  f.h = std::sqrt(std::max({(p1 - p0).squaredNorm(), (p2 - p1).squaredNorm(),
                            (p0 - p2).squaredNorm()}));
  return f;
}

// Exact P1 element mass: area/12 * (1 + delta_ij).
inline double local_mass(const TriFrame& f, int i, int j) {
  return f.area / 12.0 * (i == j ? 2.0 : 1.0);
}

// Symmetric 6-point rule, exact for bivariate polynomials up to degree 4
// (covers every product of up to four P1 factors used here).
struct TriQuad4 {
  static constexpr int n = 6;
  // barycentric coordinates and weights (weights sum to 1)
  static constexpr double b[n][3] = {
      {0.108103018168070, 0.445948490915965, 0.445948490915965},
      {0.445948490915965, 0.108103018168070, 0.445948490915965},
      {0.445948490915965, 0.445948490915965, 0.108103018168070},
      {0.816847572980459, 0.091576213509771, 0.091576213509771},
      {0.091576213509771, 0.816847572980459, 0.091576213509771},
      {0.091576213509771, 0.091576213509771, 0.816847572980459},
  };
  static constexpr double w[n] = {
      0.223381589678011, 0.223381589678011, 0.223381589678011,
      0.109951743655322, 0.109951743655322, 0.109951743655322,
  };
};

/// Integrate a product of P1 factors given by nodal triples over one face.
/// Pass up to four factors; unused slots integrate as the constant 1.
inline double integrate_p1_product(const TriFrame& f,
                                   const std::array<double, 3>& a,
                                   const std::array<double, 3>& b = {1, 1, 1},
                                   const std::array<double, 3>& c = {1, 1, 1},
                                   const std::array<double, 3>& d = {1, 1,
                                                                     1}) {
  double s = 0;
  for (int q = 0; q < TriQuad4::n; ++q) {
    const double* l = TriQuad4::b[q];
    const double av = a[0] * l[0] + a[1] * l[1] + a[2] * l[2];
    const double bv = b[0] * l[0] + b[1] * l[1] + b[2] * l[2];
    const double cv = c[0] * l[0] + c[1] * l[1] + c[2] * l[2];
    const double dv = d[0] * l[0] + d[1] * l[1] + d[2] * l[2];
    s += TriQuad4::w[q] * av * bv * cv * dv;
  }
  return s * f.area;
}

}  // namespace surfsup
