#pragma once

#include <vector>

#include "core/common.hpp"
#include "core/mesh.hpp"

namespace surfsup {

/// Discrete differential geometry of a closed triangulated surface.
///
/// Vertex normals come from area-weighted face-normal averaging; the
/// curvature tensor on each face is the tangential gradient of the
/// piecewise-linear interpolant of the vertex normals, and the scalar mean
/// curvature H is the L2 projection of its per-face trace onto P1. With
/// outward orientation this yields H -> 2/R on a sphere of radius R.
struct GeometryData {
  MatX3 vertex_normals;              // unit
  MatX3 face_normals;                // unit, face orientation
  VecX face_areas;
  VecX vertex_H;                     // P1 mean curvature (trace projection)
  std::vector<Mat3> face_curvature;  // per-face 3x3 curvature tensor

  double total_area = 0.0;               // |Gamma|
  double mean_H = 0.0;                   // area mean of H
  double curvature_fluctuation = 0.0;    // ||H - mean_H||_0
  double curvature_fluct_sq_norm = 0.0;  // ||(H - mean_H)^2||_0
  double curvature_seminorm = 0.0;       // |H|_1 of the P1 interpolant
  double curvature_tensor_sup = 0.0;     // max_F Frobenius norm
  double length_scale = 0.0;             // ell
  double h_max = 0.0;
  int regularity_order = 1;  // m in the velocity norm; only m=1 is built

  // Analytic constant-mean-curvature surface (sphere, or ellipsoid with
  // equal axes). Downstream code uses this to apply the exact degenerate
  // conventions instead of thresholding the discrete fluctuation.
  bool constant_curvature = false;
};

/// Computes all geometric quantities. `ell` <= 0 selects the default length
/// scale sqrt(area / 4 pi), the radius of the area-equivalent sphere.
GeometryData compute_geometry(const TriMesh& mesh, double ell = 0.0);

}  // namespace surfsup
