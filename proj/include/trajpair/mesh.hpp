#pragma once

// Triangle meshes with precomputed face normals, plus axis-aligned bounds.

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "trajpair/error.hpp"
#include "trajpair/vec.hpp"

namespace trajpair {

struct Aabb {
  Vec3 min{std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }

  void expand(const Vec3& p) {
    min = component_min(min, p);
    max = component_max(max, p);
  }

  void expand(const Aabb& other) {
    min = component_min(min, other.min);
    max = component_max(max, other.max);
  }

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }

  double max_extent() const {
    const Vec3 e = extent();
    return std::fmax(e.x, std::fmax(e.y, e.z));
  }

  double min_extent() const {
    const Vec3 e = extent();
    return std::fmin(e.x, std::fmin(e.y, e.z));
  }
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> face_normals;  // unit, one per face
};

inline Aabb mesh_aabb(const TriMesh& mesh) {
  Aabb box;
  for (const Vec3& v : mesh.vertices) box.expand(v);
  return box;
}

// Validates indices, drops zero-area faces, and precomputes unit face normals.
// The number of dropped faces is reported through `dropped_faces` when given.
inline TriMesh build_mesh(std::vector<Vec3> vertices,
                          const std::vector<std::array<int, 3>>& faces,
                          int* dropped_faces = nullptr) {
  if (vertices.empty() || faces.empty()) {
    throw MeshError("build_mesh: empty vertex or face list");
  }
  const int vertex_count = static_cast<int>(vertices.size());
  TriMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.faces.reserve(faces.size());
  mesh.face_normals.reserve(faces.size());
  int dropped = 0;
  for (size_t i = 0; i < faces.size(); ++i) {
    const auto& f = faces[i];
    for (int k = 0; k < 3; ++k) {
      if (f[k] < 0 || f[k] >= vertex_count) {
        throw MeshError("build_mesh: face " + std::to_string(i) +
                        " references vertex " + std::to_string(f[k]) +
                        " of " + std::to_string(vertex_count));
      }
    }
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const Vec3 n = cross(b - a, c - a);
    const double len = norm(n);
    if (!(len > 1e-12)) {
      ++dropped;
      continue;
    }
    mesh.faces.push_back(f);
    mesh.face_normals.push_back(n / len);
  }
  if (dropped_faces != nullptr) *dropped_faces = dropped;
  if (mesh.faces.empty()) {
    throw MeshError("build_mesh: all faces degenerate");
  }
  return mesh;
}

// v' = rotation * (scale * v) + translation, with normals re-derived.
inline TriMesh transform_mesh(const TriMesh& mesh, double uniform_scale,
                              const Quat& rotation, const Vec3& translation) {
  if (!(uniform_scale > 0.0)) {
    throw MeshError("transform_mesh: scale must be positive");
  }
  TriMesh out;
  out.vertices.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) {
    out.vertices.push_back(rotate(rotation, uniform_scale * v) + translation);
  }
  out.faces = mesh.faces;
  out.face_normals.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) {
    const Vec3 n = cross(out.vertices[f[1]] - out.vertices[f[0]],
                         out.vertices[f[2]] - out.vertices[f[0]]);
    out.face_normals.push_back(normalized(n));
  }
  return out;
}

// Appends `src` to `dst`, renumbering face indices.
inline void append_mesh(TriMesh& dst, const TriMesh& src) {
  const int offset = static_cast<int>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& f : src.faces) {
    dst.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
  }
  dst.face_normals.insert(dst.face_normals.end(), src.face_normals.begin(),
                          src.face_normals.end());
}

}  // namespace trajpair
