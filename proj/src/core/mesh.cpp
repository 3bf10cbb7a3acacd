#include "core/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "core/fe_local.hpp"

namespace surfsup {

namespace {

Vec3 project_to_surface(const TriMesh& mesh, const Vec3& x) {
  switch (mesh.kind) {
    case SurfaceKind::sphere:
      return mesh.params.radius * x.normalized();
    case SurfaceKind::ellipsoid: {
      const Vec3& a = mesh.params.semi_axes;
      Vec3 y(x[0] / a[0], x[1] / a[1], x[2] / a[2]);
      y.normalize();
      return Vec3(a[0] * y[0], a[1] * y[1], a[2] * y[2]);
    }
    case SurfaceKind::torus: {
      const double R = mesh.params.major_radius;
      const double r = mesh.params.minor_radius;
      const double phi = std::atan2(x[1], x[0]);
      const double rho = std::hypot(x[0], x[1]);
      const double theta = std::atan2(x[2], rho - R);
      return Vec3((R + r * std::cos(theta)) * std::cos(phi),
                  (R + r * std::cos(theta)) * std::sin(phi),
                  r * std::sin(theta));
    }
    case SurfaceKind::file:
      return x;
  }
  return x;
}

void check_capacity(std::size_t vertices, std::size_t cap) {
  require(vertices <= cap, ErrorCode::capacity,
          "mesh would have " + std::to_string(vertices) +
              " vertices, exceeding the cap of " + std::to_string(cap));
}

TriMesh make_icosahedron(SurfaceKind kind, const ShapeParams& params) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  const int tris[20][3] = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  TriMesh mesh;
  mesh.kind = kind;
  mesh.params = params;
  mesh.level = 0;
  mesh.vertices.resize(12, 3);
  mesh.faces.resize(20, 3);
  for (int i = 0; i < 12; ++i) {
    Vec3 p(raw[i][0], raw[i][1], raw[i][2]);
    mesh.vertices.row(i) = project_to_surface(mesh, p).transpose();
  }
  for (int f = 0; f < 20; ++f)
    for (int c = 0; c < 3; ++c) mesh.faces(f, c) = tris[f][c];
  return mesh;
}

TriMesh make_torus(const ShapeParams& params, int level) {
  const double R = params.major_radius;
  const double r = params.minor_radius;
  const int nu = 4 << level;  // major circle
  const int nv = 2 << level;  // minor circle

  TriMesh mesh;
  mesh.kind = SurfaceKind::torus;
  mesh.params = params;
  mesh.level = level;
  mesh.vertices.resize(static_cast<long>(nu) * nv, 3);
  mesh.faces.resize(2L * nu * nv, 3);

  const double two_pi = 2.0 * M_PI;
  for (int i = 0; i < nu; ++i) {
    const double phi = two_pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double theta = two_pi * j / nv;
      const long v = static_cast<long>(i) * nv + j;
      mesh.vertices(v, 0) = (R + r * std::cos(theta)) * std::cos(phi);
      mesh.vertices(v, 1) = (R + r * std::cos(theta)) * std::sin(phi);
      mesh.vertices(v, 2) = r * std::sin(theta);
    }
  }
  long f = 0;
  for (int i = 0; i < nu; ++i) {
    const int ip = (i + 1) % nu;
    for (int j = 0; j < nv; ++j) {
      const int jp = (j + 1) % nv;
      const int v00 = i * nv + j, v10 = ip * nv + j;
      const int v11 = ip * nv + jp, v01 = i * nv + jp;
      mesh.faces.row(f++) << v00, v10, v11;
      mesh.faces.row(f++) << v00, v11, v01;
    }
  }
  return mesh;
}

}  // namespace

TriMesh generate_surface(SurfaceKind kind, const ShapeParams& params,
                         int level, std::size_t vertex_cap) {
  require(level >= 0, ErrorCode::invalid_argument,
          "refinement level must be >= 0");
  switch (kind) {
    case SurfaceKind::sphere:
      require(params.radius > 0, ErrorCode::invalid_argument,
              "sphere radius must be positive");
      break;
    case SurfaceKind::ellipsoid:
      require(params.semi_axes.minCoeff() > 0, ErrorCode::invalid_argument,
              "ellipsoid semi-axes must be positive");
      break;
    case SurfaceKind::torus:
      require(params.minor_radius > 0 &&
                  params.major_radius > params.minor_radius,
              ErrorCode::invalid_argument,
              "torus requires major radius > minor radius > 0");
      break;
    case SurfaceKind::file:
      fail(ErrorCode::invalid_argument,
           "kind 'file' cannot be generated; use load_mesh");
  }

  if (kind == SurfaceKind::torus) {
    check_capacity(static_cast<std::size_t>(4 << level) * (2 << level),
                   vertex_cap);
    return make_torus(params, level);
  }

  // subdivided icosahedron: V(L) = 10*4^L + 2
  check_capacity(10 * (std::size_t(1) << (2 * level)) + 2, vertex_cap);
  TriMesh mesh = make_icosahedron(kind, params);
  for (int l = 0; l < level; ++l) mesh = refine(mesh, vertex_cap);
  return mesh;
}

TriMesh refine(const TriMesh& mesh, std::size_t vertex_cap) {
  const int nv = mesh.vertex_count();
  const int nf = mesh.face_count();
  check_capacity(static_cast<std::size_t>(nv) + mesh.edge_count(),
                 vertex_cap);

  TriMesh out;
  out.kind = mesh.kind;
  out.params = mesh.params;
  out.level = mesh.level + 1;
  out.vertices.resize(nv + mesh.edge_count(), 3);
  out.vertices.topRows(nv) = mesh.vertices;
  out.faces.resize(4L * nf, 3);

  std::map<std::pair<int, int>, int> midpoint;
  int next = nv;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const Vec3 m = 0.5 * (mesh.vertices.row(a) + mesh.vertices.row(b));
    out.vertices.row(next) = project_to_surface(mesh, m).transpose();
    midpoint.emplace(key, next);
    return next++;
  };

  for (int f = 0; f < nf; ++f) {
    const int v0 = mesh.faces(f, 0), v1 = mesh.faces(f, 1),
              v2 = mesh.faces(f, 2);
    const int m01 = mid(v0, v1), m12 = mid(v1, v2), m20 = mid(v2, v0);
    out.faces.row(4L * f + 0) << v0, m01, m20;
    out.faces.row(4L * f + 1) << v1, m12, m01;
    out.faces.row(4L * f + 2) << v2, m20, m12;
    out.faces.row(4L * f + 3) << m01, m12, m20;
  }
  return out;
}

MeshReport check_mesh(const TriMesh& mesh) {
  MeshReport rep;
  std::map<std::pair<int, int>, int> undirected;
  std::map<std::pair<int, int>, int> directed;
  for (int f = 0; f < mesh.face_count(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const int a = mesh.faces(f, c), b = mesh.faces(f, (c + 1) % 3);
      ++undirected[std::minmax(a, b)];
      ++directed[{a, b}];
    }
  }
  rep.closed = true;
  for (const auto& [e, cnt] : undirected)
    if (cnt != 2) rep.closed = false;
  rep.consistently_oriented = true;
  for (const auto& [e, cnt] : directed)
    if (cnt != 1) rep.consistently_oriented = false;
  rep.euler_characteristic = mesh.vertex_count() -
                             static_cast<long>(undirected.size()) +
                             mesh.face_count();
  rep.min_area = std::numeric_limits<double>::infinity();
  for (int f = 0; f < mesh.face_count(); ++f) {
    const TriFrame fr =
        tri_frame(mesh.vertices.row(mesh.faces(f, 0)),
                  mesh.vertices.row(mesh.faces(f, 1)),
                  mesh.vertices.row(mesh.faces(f, 2)));
    rep.min_area = std::min(rep.min_area, fr.area);
    rep.max_area = std::max(rep.max_area, fr.area);
    rep.h_max = std::max(rep.h_max, fr.h);
  }
  return rep;
}

void require_valid(const TriMesh& mesh) {
  require(mesh.vertex_count() >= 4 && mesh.face_count() >= 4,
          ErrorCode::geometry, "mesh too small to be a closed surface");
  const MeshReport rep = check_mesh(mesh);
  require(rep.closed, ErrorCode::geometry,
          "mesh has boundary or non-manifold edges");
  require(rep.consistently_oriented, ErrorCode::geometry,
          "mesh orientation is not globally consistent");
  require(rep.min_area > 0, ErrorCode::geometry,
          "mesh contains a zero-area face");
}

double mesh_size(const TriMesh& mesh) { return check_mesh(mesh).h_max; }

TriMesh flipped(const TriMesh& mesh) {
  TriMesh out = mesh;
  out.faces.col(1).swap(out.faces.col(2));
  return out;
}

std::string surface_description(SurfaceKind kind, const ShapeParams& p) {
  char buf[96];
  switch (kind) {
    case SurfaceKind::sphere:
      std::snprintf(buf, sizeof buf, "sphere(r=%g)", p.radius);
      return buf;
    case SurfaceKind::ellipsoid:
      std::snprintf(buf, sizeof buf, "ellipsoid(%g,%g,%g)", p.semi_axes[0],
                    p.semi_axes[1], p.semi_axes[2]);
      return buf;
    case SurfaceKind::torus:
      std::snprintf(buf, sizeof buf, "torus(R=%g,r=%g)", p.major_radius,
                    p.minor_radius);
      return buf;
    case SurfaceKind::file:
      return "file";
  }
  return "unknown";
}

namespace {

std::string extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext;
}

void write_off(const TriMesh& mesh, std::ostream& os) {
  os << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
  char buf[96];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", mesh.vertices(v, 0),
                  mesh.vertices(v, 1), mesh.vertices(v, 2));
    os << buf;
  }
  for (int f = 0; f < mesh.face_count(); ++f)
    os << "3 " << mesh.faces(f, 0) << ' ' << mesh.faces(f, 1) << ' '
       << mesh.faces(f, 2) << '\n';
}

void write_obj(const TriMesh& mesh, std::ostream& os) {
  char buf[96];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n",
                  mesh.vertices(v, 0), mesh.vertices(v, 1),
                  mesh.vertices(v, 2));
    os << buf;
  }
  for (int f = 0; f < mesh.face_count(); ++f)
    os << "f " << mesh.faces(f, 0) + 1 << ' ' << mesh.faces(f, 1) + 1 << ' '
       << mesh.faces(f, 2) + 1 << '\n';
}

// Pulls the next non-comment, non-empty line.
bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

TriMesh read_off(std::istream& is, const std::string& path) {
  std::string line;
  require(next_line(is, line), ErrorCode::io, "empty OFF file: " + path);
  {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "OFF") {
      // counts may share the header line or follow it
      long a;
      if (!(ss >> a)) {
        require(next_line(is, line), ErrorCode::io,
                "truncated OFF file: " + path);
      } else {
        line = line.substr(line.find("OFF") + 3);
      }
    }
  }
  long nv = 0, nf = 0, ne = 0;
  {
    std::istringstream ss(line);
    require(static_cast<bool>(ss >> nv >> nf), ErrorCode::io,
            "bad OFF counts line in " + path);
    ss >> ne;  // ignored
  }
  require(nv > 0 && nf > 0, ErrorCode::io, "bad OFF counts in " + path);

  TriMesh mesh;
  mesh.kind = SurfaceKind::file;
  mesh.vertices.resize(nv, 3);
  mesh.faces.resize(nf, 3);
  for (long v = 0; v < nv; ++v) {
    require(next_line(is, line), ErrorCode::io, "truncated OFF vertices");
    std::istringstream ss(line);
    require(
        static_cast<bool>(ss >> mesh.vertices(v, 0) >> mesh.vertices(v, 1) >>
                          mesh.vertices(v, 2)),
        ErrorCode::io, "bad OFF vertex line in " + path);
  }
  for (long f = 0; f < nf; ++f) {
    require(next_line(is, line), ErrorCode::io, "truncated OFF faces");
    std::istringstream ss(line);
    int n, i, j, k;
    require(static_cast<bool>(ss >> n >> i >> j >> k) && n == 3,
            ErrorCode::io, "only triangular OFF faces are supported");
    mesh.faces.row(f) << i, j, k;
  }
  return mesh;
}

TriMesh read_obj(std::istream& is, const std::string& path) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      require(static_cast<bool>(ss >> p[0] >> p[1] >> p[2]), ErrorCode::io,
              "bad OBJ vertex in " + path);
      verts.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int c = 0; c < 3; ++c) {
        std::string tok;
        require(static_cast<bool>(ss >> tok), ErrorCode::io,
                "only triangular OBJ faces are supported");
        f[c] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      std::string extra;
      require(!(ss >> extra), ErrorCode::io,
              "only triangular OBJ faces are supported");
      faces.push_back(f);
    }
  }
  require(!verts.empty() && !faces.empty(), ErrorCode::io,
          "no mesh data in " + path);
  TriMesh mesh;
  mesh.kind = SurfaceKind::file;
  mesh.vertices.resize(static_cast<long>(verts.size()), 3);
  for (std::size_t v = 0; v < verts.size(); ++v)
    mesh.vertices.row(static_cast<long>(v)) = verts[v].transpose();
  mesh.faces.resize(static_cast<long>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f)
    mesh.faces.row(static_cast<long>(f)) << faces[f][0], faces[f][1],
        faces[f][2];
  return mesh;
}

}  // namespace

TriMesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrorCode::io, "cannot open " + path);
  const std::string ext = extension(path);
  TriMesh mesh;
  if (ext == "off")
    mesh = read_off(is, path);
  else if (ext == "obj")
    mesh = read_obj(is, path);
  else
    fail(ErrorCode::io, "unsupported mesh format: " + path);
  require(mesh.faces.minCoeff() >= 0 &&
              mesh.faces.maxCoeff() < mesh.vertex_count(),
          ErrorCode::io, "face index out of range in " + path);
  return mesh;
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::io, "cannot write " + path);
  const std::string ext = extension(path);
  if (ext == "off")
    write_off(mesh, os);
  else if (ext == "obj")
    write_obj(mesh, os);
  else
    fail(ErrorCode::io, "unsupported mesh format: " + path);
  require(os.good(), ErrorCode::io, "write failed: " + path);
}

}  // namespace surfsup
