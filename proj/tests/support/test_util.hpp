#pragma once

// Shared helpers for the test suites: scratch directories, canonical test
// scenes, and independent brute-force oracles for the accelerated geometry
// queries (exhaustive per-triangle scans, no BVH involvement).

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "trajpair/bvh.hpp"
#include "trajpair/camera.hpp"
#include "trajpair/mesh.hpp"
#include "trajpair/primitives.hpp"
#include "trajpair/rng.hpp"
#include "trajpair/scene.hpp"

namespace test_util {

using namespace trajpair;

inline std::filesystem::path fresh_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path("test_tmp") / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Exhaustive nearest-hit scan with the same tie rule as the BVH traversal.
inline std::optional<HitRecord> brute_ray_cast(const TriMesh& mesh, const Ray& ray) {
  double best_t = std::numeric_limits<double>::infinity();
  int best_face = -1;
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    double t = 0.0;
    if (intersect_triangle(ray.origin, ray.direction, mesh.vertices[face[0]],
                           mesh.vertices[face[1]], mesh.vertices[face[2]], ray.t_max, &t)) {
      if (t < best_t || (t == best_t && static_cast<int>(f) < best_face)) {
        best_t = t;
        best_face = static_cast<int>(f);
      }
    }
  }
  if (best_face < 0) return std::nullopt;
  HitRecord hit;
  hit.t = best_t;
  hit.point = ray.origin + best_t * ray.direction;
  hit.face_normal = mesh.face_normals[best_face];
  hit.face_index = best_face;
  return hit;
}

inline double brute_clearance(const TriMesh& mesh, const Vec3& center, double radius) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& face : mesh.faces) {
    const Vec3 q = closest_point_on_triangle(center, mesh.vertices[face[0]],
                                             mesh.vertices[face[1]], mesh.vertices[face[2]]);
    best = std::fmin(best, norm(center - q));
  }
  return best - radius;
}

inline TriMesh make_floor_quad(double half = 10.0) {
  return build_mesh({{-half, -half, 0}, {half, -half, 0}, {half, half, 0}, {-half, half, 0}},
                    {{0, 1, 2}, {0, 2, 3}});
}

// Large flat floor only; rest plane at z = 0.
inline Scene make_floor_scene(double extent = 20.0) {
  return make_scene({{"floor", transform_mesh(make_box_mesh(extent, extent, 0.1), 1.0, Quat{},
                                              {0, 0, -0.05})}});
}

// Floor + four named walls; optional clutter appended by the caller.
inline std::vector<std::pair<std::string, TriMesh>> room_objects(double w = 6.0, double d = 6.0,
                                                                 double wall_h = 2.8) {
  std::vector<std::pair<std::string, TriMesh>> objects;
  const double slab = 0.1;
  objects.emplace_back("floor", transform_mesh(make_box_mesh(w, d, slab), 1.0, Quat{},
                                               {0, 0, -0.5 * slab}));
  objects.emplace_back("wall_north", transform_mesh(make_box_mesh(w, slab, wall_h), 1.0, Quat{},
                                                    {0, 0.5 * (d + slab), 0.5 * wall_h}));
  objects.emplace_back("wall_south", transform_mesh(make_box_mesh(w, slab, wall_h), 1.0, Quat{},
                                                    {0, -0.5 * (d + slab), 0.5 * wall_h}));
  objects.emplace_back("wall_east", transform_mesh(make_box_mesh(slab, d, wall_h), 1.0, Quat{},
                                                   {0.5 * (w + slab), 0, 0.5 * wall_h}));
  objects.emplace_back("wall_west", transform_mesh(make_box_mesh(slab, d, wall_h), 1.0, Quat{},
                                                   {-0.5 * (w + slab), 0, 0.5 * wall_h}));
  return objects;
}

inline Scene make_room_scene() { return make_scene(room_objects()); }

// Camera at the room edge looking down toward the center, mostly floor in view.
inline Camera room_camera(int width = 320, int height = 180) {
  return make_camera({-2.4, 0, 1.5}, {0.8, 0, 0.3}, {0, 0, 1}, 0.9599310885968813, width,
                     height);
}

inline Vec3 random_unit_vector(Rng& rng) {
  for (;;) {
    const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double len = norm(v);
    if (len > 1e-3 && len <= 1.0) return v / len;
  }
}

inline std::vector<std::filesystem::path> sorted_tree(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(std::filesystem::relative(entry.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline bool files_equal(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::string da((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string db((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return da == db;
}

// Byte-level equality of two directory trees.
inline bool trees_equal(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto fa = sorted_tree(a);
  const auto fb = sorted_tree(b);
  if (fa != fb) return false;
  for (const auto& rel : fa) {
    if (!files_equal(a / rel, b / rel)) return false;
  }
  return true;
}

}  // namespace test_util
