#pragma once

// Procedural primitive meshes. All are centered at the origin with outward
// normals; canonical sizes fit in the unit cube so a uniform scale maps
// directly to world extent.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "trajpair/mesh.hpp"

namespace trajpair {

inline TriMesh make_box_mesh(double size_x, double size_y, double size_z) {
  const double hx = 0.5 * size_x, hy = 0.5 * size_y, hz = 0.5 * size_z;
  std::vector<Vec3> v = {
      {-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, hy, -hz}, {-hx, hy, -hz},
      {-hx, -hy, hz},  {hx, -hy, hz},  {hx, hy, hz},  {-hx, hy, hz},
  };
  const std::vector<std::array<int, 3>> f = {
      {0, 2, 1}, {0, 3, 2},  // bottom (-z)
      {4, 5, 6}, {4, 6, 7},  // top (+z)
      {0, 1, 5}, {0, 5, 4},  // -y
      {2, 3, 7}, {2, 7, 6},  // +y
      {1, 2, 6}, {1, 6, 5},  // +x
      {3, 0, 4}, {3, 4, 7},  // -x
  };
  return build_mesh(std::move(v), f);
}

inline TriMesh make_box_mesh(double size) { return make_box_mesh(size, size, size); }

// Box whose faces are subdivided into patches no larger than `max_patch`.
// Large architectural surfaces need this: a handful of room-sized triangles
// gives every BVH node a room-sized box and ray casts degrade to brute force.
inline TriMesh make_gridded_box_mesh(double size_x, double size_y, double size_z,
                                     double max_patch) {
  const double hx = 0.5 * size_x, hy = 0.5 * size_y, hz = 0.5 * size_z;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  const auto emit_face = [&](const Vec3& origin, const Vec3& du, const Vec3& dv,
                             double u_len, double v_len) {
    const int nu = std::max(1, static_cast<int>(std::ceil(u_len / max_patch)));
    const int nv = std::max(1, static_cast<int>(std::ceil(v_len / max_patch)));
    const int base = static_cast<int>(vertices.size());
    for (int j = 0; j <= nv; ++j) {
      for (int i = 0; i <= nu; ++i) {
        vertices.push_back(origin + (u_len * i / nu) * du + (v_len * j / nv) * dv);
      }
    }
    const int stride = nu + 1;
    for (int j = 0; j < nv; ++j) {
      for (int i = 0; i < nu; ++i) {
        const int v00 = base + j * stride + i;
        const int v10 = v00 + 1;
        const int v01 = v00 + stride;
        const int v11 = v01 + 1;
        faces.push_back({v00, v10, v11});
        faces.push_back({v00, v11, v01});
      }
    }
  };
  // du x dv points along the outward normal of each face.
  emit_face({-hx, -hy, hz}, {1, 0, 0}, {0, 1, 0}, size_x, size_y);    // +z
  emit_face({-hx, -hy, -hz}, {0, 1, 0}, {1, 0, 0}, size_y, size_x);   // -z
  emit_face({hx, -hy, -hz}, {0, 1, 0}, {0, 0, 1}, size_y, size_z);    // +x
  emit_face({-hx, -hy, -hz}, {0, 0, 1}, {0, 1, 0}, size_z, size_y);   // -x
  emit_face({-hx, hy, -hz}, {0, 0, 1}, {1, 0, 0}, size_z, size_x);    // +y
  emit_face({-hx, -hy, -hz}, {1, 0, 0}, {0, 0, 1}, size_x, size_z);   // -y
  return build_mesh(std::move(vertices), faces);
}

// Icosphere with `subdivisions` refinement steps (2 -> 320 faces).
inline TriMesh make_sphere_mesh(double radius, int subdivisions = 2) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& p : v) p = normalized(p);
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (int step = 0; step < subdivisions; ++step) {
    std::map<std::pair<int, int>, int> midpoint;
    const auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(v.size());
      v.push_back(normalized(0.5 * (v[a] + v[b])));
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return build_mesh(std::move(v), f);
}

inline TriMesh make_cylinder_mesh(double radius, double height, int segments = 24) {
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> f;
  const double hz = 0.5 * height;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * 3.14159265358979323846 * i / segments;
    v.push_back({radius * std::cos(a), radius * std::sin(a), -hz});
    v.push_back({radius * std::cos(a), radius * std::sin(a), hz});
  }
  const int bottom_center = static_cast<int>(v.size());
  v.push_back({0, 0, -hz});
  const int top_center = static_cast<int>(v.size());
  v.push_back({0, 0, hz});
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    f.push_back({b0, b1, t1});
    f.push_back({b0, t1, t0});
    f.push_back({bottom_center, b1, b0});
    f.push_back({top_center, t0, t1});
  }
  return build_mesh(std::move(v), f);
}

inline TriMesh make_cone_mesh(double radius, double height, int segments = 24) {
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> f;
  const double hz = 0.5 * height;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * 3.14159265358979323846 * i / segments;
    v.push_back({radius * std::cos(a), radius * std::sin(a), -hz});
  }
  const int apex = static_cast<int>(v.size());
  v.push_back({0, 0, hz});
  const int base_center = static_cast<int>(v.size());
  v.push_back({0, 0, -hz});
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    f.push_back({i, j, apex});
    f.push_back({base_center, j, i});
  }
  return build_mesh(std::move(v), f);
}

// Table: slab top on four corner legs, merged into one mesh.
inline TriMesh make_table_mesh(double width, double depth, double height) {
  const double top_thickness = std::fmin(0.06, 0.15 * height);
  const double leg = std::fmin(0.05, 0.2 * std::fmin(width, depth));
  TriMesh top = make_box_mesh(width, depth, top_thickness);
  TriMesh mesh = transform_mesh(top, 1.0, Quat{}, {0, 0, 0.5 * height - 0.5 * top_thickness});
  const double leg_height = height - top_thickness;
  const double lx = 0.5 * width - leg;
  const double ly = 0.5 * depth - leg;
  for (const double sx : {-1.0, 1.0}) {
    for (const double sy : {-1.0, 1.0}) {
      TriMesh leg_mesh = make_box_mesh(leg, leg, leg_height);
      append_mesh(mesh, transform_mesh(leg_mesh, 1.0, Quat{},
                                       {sx * lx, sy * ly, -0.5 * height + 0.5 * leg_height}));
    }
  }
  return mesh;
}

}  // namespace trajpair
