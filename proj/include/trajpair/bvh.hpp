#pragma once

// Bounding-volume hierarchy over triangle meshes: nearest-hit ray casting and
// point-to-surface clearance queries. Splits are longest-axis median with a
// deterministic tie order, so the same mesh always builds the same tree.
//
// The traversal is required to agree exactly with an exhaustive per-triangle
// scan: equal-t hits are resolved toward the lowest face index, and node
// pruning is strict (`>` against the current best) so equal-t candidates in
// sibling nodes are still visited.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "trajpair/error.hpp"
#include "trajpair/mesh.hpp"
#include "trajpair/vec.hpp"

namespace trajpair {

inline constexpr double kRayEpsilon = 1e-6;
inline constexpr int kBvhLeafSize = 4;

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
  double t_max = std::numeric_limits<double>::infinity();
};

struct HitRecord {
  double t = 0.0;
  Vec3 point;
  Vec3 face_normal;  // geometric normal of the hit face (unit)
  int face_index = -1;
  int object_id = 0;
};

struct BvhNode {
  Aabb box;
  int left = -1;
  int right = -1;
  int first = 0;
  int count = 0;  // > 0 marks a leaf over face_order[first, first+count)
};

struct Bvh {
  std::vector<BvhNode> nodes;
  std::vector<int> face_order;
};

inline Bvh build_bvh(const TriMesh& mesh) {
  if (mesh.faces.empty()) throw MeshError("build_bvh: empty mesh");
  const int face_count = static_cast<int>(mesh.faces.size());

  std::vector<Vec3> centroids(face_count);
  std::vector<Aabb> face_boxes(face_count);
  for (int i = 0; i < face_count; ++i) {
    const auto& f = mesh.faces[i];
    Aabb box;
    box.expand(mesh.vertices[f[0]]);
    box.expand(mesh.vertices[f[1]]);
    box.expand(mesh.vertices[f[2]]);
    face_boxes[i] = box;
    centroids[i] = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
  }

  Bvh bvh;
  bvh.face_order.resize(face_count);
  for (int i = 0; i < face_count; ++i) bvh.face_order[i] = i;
  bvh.nodes.reserve(2 * face_count);

  struct Range {
    int lo, hi, node;
  };
  bvh.nodes.push_back({});
  std::vector<Range> stack{{0, face_count, 0}};
  while (!stack.empty()) {
    const Range range = stack.back();
    stack.pop_back();
    Aabb box;
    for (int i = range.lo; i < range.hi; ++i) box.expand(face_boxes[bvh.face_order[i]]);
    BvhNode& node = bvh.nodes[range.node];
    node.box = box;
    const int count = range.hi - range.lo;
    if (count <= kBvhLeafSize) {
      node.first = range.lo;
      node.count = count;
      continue;
    }
    const Vec3 extent = box.extent();
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;
    const auto key = [&](int face) {
      const Vec3& c = centroids[face];
      return axis == 0 ? c.x : (axis == 1 ? c.y : c.z);
    };
    std::sort(bvh.face_order.begin() + range.lo, bvh.face_order.begin() + range.hi,
              [&](int a, int b) {
                const double ka = key(a), kb = key(b);
                if (ka != kb) return ka < kb;
                return a < b;
              });
    const int mid = range.lo + count / 2;
    const int left = static_cast<int>(bvh.nodes.size());
    bvh.nodes.push_back({});
    bvh.nodes.push_back({});
    bvh.nodes[range.node].left = left;
    bvh.nodes[range.node].right = left + 1;
    stack.push_back({range.lo, mid, left});
    stack.push_back({mid, range.hi, left + 1});
  }
  return bvh;
}

// Moller-Trumbore with slightly inclusive barycentric bounds, so rays through
// shared edges register on both adjacent faces (the lowest index wins the tie).
inline bool intersect_triangle(const Vec3& origin, const Vec3& direction,
                               const Vec3& a, const Vec3& b, const Vec3& c,
                               double t_max, double* t_out) {
  constexpr double kBaryEps = 1e-12;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = cross(direction, e2);
  const double det = dot(e1, pvec);
  if (std::fabs(det) < 1e-14) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = dot(tvec, pvec) * inv_det;
  if (u < -kBaryEps || u > 1.0 + kBaryEps) return false;
  const Vec3 qvec = cross(tvec, e1);
  const double v = dot(direction, qvec) * inv_det;
  if (v < -kBaryEps || u + v > 1.0 + kBaryEps) return false;
  const double t = dot(e2, qvec) * inv_det;
  if (t <= kRayEpsilon || t > t_max) return false;
  *t_out = t;
  return true;
}

// Slab test over [0, limit]; conservative, never rejects a box containing a
// valid hit. Axes the ray runs parallel to are handled with a containment
// check so no 0 * inf NaNs enter the interval arithmetic (std::fmin/fmax
// would handle those but defeat inlining).
inline bool intersect_aabb(const Aabb& box, const Vec3& origin, const Vec3& direction,
                           const Vec3& inv_dir, double limit, double* entry) {
  double tmin = 0.0;
  double tmax = limit;
  if (direction.x != 0.0) {
    double t1 = (box.min.x - origin.x) * inv_dir.x;
    double t2 = (box.max.x - origin.x) * inv_dir.x;
    if (t1 > t2) {
      const double tmp = t1;
      t1 = t2;
      t2 = tmp;
    }
    if (t1 > tmin) tmin = t1;
    if (t2 < tmax) tmax = t2;
  } else if (origin.x < box.min.x || origin.x > box.max.x) {
    return false;
  }
  if (direction.y != 0.0) {
    double t1 = (box.min.y - origin.y) * inv_dir.y;
    double t2 = (box.max.y - origin.y) * inv_dir.y;
    if (t1 > t2) {
      const double tmp = t1;
      t1 = t2;
      t2 = tmp;
    }
    if (t1 > tmin) tmin = t1;
    if (t2 < tmax) tmax = t2;
  } else if (origin.y < box.min.y || origin.y > box.max.y) {
    return false;
  }
  if (direction.z != 0.0) {
    double t1 = (box.min.z - origin.z) * inv_dir.z;
    double t2 = (box.max.z - origin.z) * inv_dir.z;
    if (t1 > t2) {
      const double tmp = t1;
      t1 = t2;
      t2 = tmp;
    }
    if (t1 > tmin) tmin = t1;
    if (t2 < tmax) tmax = t2;
  } else if (origin.z < box.min.z || origin.z > box.max.z) {
    return false;
  }
  *entry = tmin;
  return tmin <= tmax;
}

inline std::optional<HitRecord> ray_cast(const TriMesh& mesh, const Bvh& bvh,
                                         const Ray& ray, int object_id = 0) {
  const Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  double best_t = std::numeric_limits<double>::infinity();
  int best_face = -1;

  struct StackItem {
    int node;
    double entry;
  };
  StackItem stack[128];
  int top = 0;
  {
    double root_entry = 0.0;
    if (!intersect_aabb(bvh.nodes[0].box, ray.origin, ray.direction, inv_dir,
                        ray.t_max, &root_entry)) {
      return std::nullopt;
    }
    stack[top++] = {0, root_entry};
  }
  while (top > 0) {
    const StackItem item = stack[--top];
    const double limit = ray.t_max < best_t ? ray.t_max : best_t;
    if (item.entry > limit) continue;
    const BvhNode& node = bvh.nodes[item.node];
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int face = bvh.face_order[i];
        const auto& f = mesh.faces[face];
        double t = 0.0;
        if (intersect_triangle(ray.origin, ray.direction, mesh.vertices[f[0]],
                               mesh.vertices[f[1]], mesh.vertices[f[2]], ray.t_max, &t)) {
          if (t < best_t || (t == best_t && face < best_face)) {
            best_t = t;
            best_face = face;
          }
        }
      }
    } else {
      // Near child first; order does not affect the result, only speed.
      double entry_l = 0.0, entry_r = 0.0;
      const bool hit_l = intersect_aabb(bvh.nodes[node.left].box, ray.origin, ray.direction,
                                        inv_dir, limit, &entry_l);
      const bool hit_r = intersect_aabb(bvh.nodes[node.right].box, ray.origin, ray.direction,
                                        inv_dir, limit, &entry_r);
      if (hit_l && hit_r) {
        if (entry_l <= entry_r) {
          stack[top++] = {node.right, entry_r};
          stack[top++] = {node.left, entry_l};
        } else {
          stack[top++] = {node.left, entry_l};
          stack[top++] = {node.right, entry_r};
        }
      } else if (hit_l) {
        stack[top++] = {node.left, entry_l};
      } else if (hit_r) {
        stack[top++] = {node.right, entry_r};
      }
    }
  }
  if (best_face < 0) return std::nullopt;
  HitRecord hit;
  hit.t = best_t;
  hit.point = ray.origin + best_t * ray.direction;
  hit.face_normal = mesh.face_normals[best_face];
  hit.face_index = best_face;
  hit.object_id = object_id;
  return hit;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + v * ab + w * ac;
}

inline double aabb_distance2(const Aabb& box, const Vec3& p) {
  const double dx = p.x < box.min.x ? box.min.x - p.x : (p.x > box.max.x ? p.x - box.max.x : 0.0);
  const double dy = p.y < box.min.y ? box.min.y - p.y : (p.y > box.max.y ? p.y - box.max.y : 0.0);
  const double dz = p.z < box.min.z ? box.min.z - p.z : (p.z > box.max.z ? p.z - box.max.z : 0.0);
  return dx * dx + dy * dy + dz * dz;
}

struct SurfacePoint {
  double distance = std::numeric_limits<double>::infinity();
  Vec3 point;
  int face_index = -1;
};

inline SurfacePoint closest_surface_point(const TriMesh& mesh, const Bvh& bvh,
                                          const Vec3& p) {
  SurfacePoint best;
  double best_d2 = std::numeric_limits<double>::infinity();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = bvh.nodes[stack[--top]];
    if (aabb_distance2(node.box, p) > best_d2) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int face = bvh.face_order[i];
        const auto& f = mesh.faces[face];
        const Vec3 q = closest_point_on_triangle(p, mesh.vertices[f[0]],
                                                 mesh.vertices[f[1]], mesh.vertices[f[2]]);
        const double d2 = norm2(p - q);
        if (d2 < best_d2 || (d2 == best_d2 && face < best.face_index)) {
          best_d2 = d2;
          best.point = q;
          best.face_index = face;
        }
      }
    } else {
      const double dl = aabb_distance2(bvh.nodes[node.left].box, p);
      const double dr = aabb_distance2(bvh.nodes[node.right].box, p);
      if (dl <= dr) {
        if (dr <= best_d2) stack[top++] = node.right;
        if (dl <= best_d2) stack[top++] = node.left;
      } else {
        if (dl <= best_d2) stack[top++] = node.left;
        if (dr <= best_d2) stack[top++] = node.right;
      }
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

// Signed clearance of a sphere against the mesh; negative means penetration.
inline double clearance(const TriMesh& mesh, const Bvh& bvh, const Vec3& center,
                        double radius) {
  return closest_surface_point(mesh, bvh, center).distance - radius;
}

// Owning mesh + BVH bundle; the unit handed to physics and rendering.
struct MeshAccel {
  TriMesh mesh;
  Bvh bvh;
};

inline MeshAccel make_accel(TriMesh mesh) {
  MeshAccel accel;
  accel.mesh = std::move(mesh);
  accel.bvh = build_bvh(accel.mesh);
  return accel;
}

}  // namespace trajpair
