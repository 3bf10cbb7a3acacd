#pragma once

#include <cstddef>
#include <string>

#include "core/common.hpp"

namespace surfsup {

enum class SurfaceKind { sphere, ellipsoid, torus, file };

struct ShapeParams {
  double radius = 1.0;             // sphere
  Vec3 semi_axes{1.0, 1.0, 1.0};   // ellipsoid
  double major_radius = 2.0;       // torus
  double minor_radius = 1.0;
};

/// Closed, consistently oriented triangulated surface. Vertices of analytic
/// kinds lie exactly on the analytic surface; `level` counts uniform
/// refinements from the base resolution.
struct TriMesh {
  MatX3 vertices;
  FaceMat faces;
  SurfaceKind kind = SurfaceKind::file;
  ShapeParams params;
  int level = 0;

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  int face_count() const { return static_cast<int>(faces.rows()); }
  long edge_count() const { return 3L * face_count() / 2; }
};

inline constexpr std::size_t kDefaultVertexCap = 1'000'000;

TriMesh generate_surface(SurfaceKind kind, const ShapeParams& params,
                         int level,
                         std::size_t vertex_cap = kDefaultVertexCap);

/// 1-to-4 midpoint subdivision; analytic kinds re-project new vertices onto
/// the exact surface. Adds one vertex per edge and increments `level`.
TriMesh refine(const TriMesh& mesh,
               std::size_t vertex_cap = kDefaultVertexCap);

struct MeshReport {
  bool closed = false;                 // every edge shared by exactly 2 faces
  bool consistently_oriented = false;  // each directed edge appears once
  long euler_characteristic = 0;
  double min_area = 0.0;
  double max_area = 0.0;
  double h_max = 0.0;  // max over faces of longest edge
};

MeshReport check_mesh(const TriMesh& mesh);

/// Throws ErrorCode::geometry when the mesh violates the closed-surface
/// invariants (boundary edges, inconsistent orientation, degenerate faces).
void require_valid(const TriMesh& mesh);

double mesh_size(const TriMesh& mesh);

/// OFF (ASCII) and OBJ import/export, chosen by file extension.
TriMesh load_mesh(const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path);

/// Copy with all face orientations reversed.
TriMesh flipped(const TriMesh& mesh);

/// Short human/provenance form, e.g. "sphere(r=1)" or "ellipsoid(2,1,1)".
std::string surface_description(SurfaceKind kind, const ShapeParams& params);

}  // namespace surfsup
