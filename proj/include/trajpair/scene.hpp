#pragma once

// Static scene: named triangle-mesh objects with per-object BVHs plus a merged
// collision accelerator that maps hit faces back to their owning object.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trajpair/bvh.hpp"
#include "trajpair/camera.hpp"
#include "trajpair/mesh.hpp"

namespace trajpair {

// Objects that must never be removed by scene modification: matched by name
// keyword or by large-flat geometry relative to the scene bounds.
inline const std::vector<std::string>& structural_keywords() {
  static const std::vector<std::string> kWords = {"wall",  "floor",  "ceiling", "ground",
                                                  "stair", "column", "beam"};
  return kWords;
}

inline bool classify_structural(const std::string& name, const TriMesh& mesh,
                                const Aabb& scene_bounds) {
  std::string lower(name.size(), '\0');
  std::transform(name.begin(), name.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const std::string& word : structural_keywords()) {
    if (lower.find(word) != std::string::npos) return true;
  }
  const Aabb box = mesh_aabb(mesh);
  const Vec3 e = box.extent();
  const double largest = box.max_extent();
  const double thinnest = box.min_extent();
  if (largest <= 0.0) return false;
  double scene_extent_on_axis = 0.0;
  const Vec3 se = scene_bounds.extent();
  if (e.x >= e.y && e.x >= e.z) {
    scene_extent_on_axis = se.x;
  } else if (e.y >= e.x && e.y >= e.z) {
    scene_extent_on_axis = se.y;
  } else {
    scene_extent_on_axis = se.z;
  }
  return thinnest <= 0.05 * largest && largest >= 0.5 * scene_extent_on_axis;
}

struct SceneObject {
  std::string name;
  TriMesh mesh;
  Bvh bvh;
  bool structural = false;
  int object_id = 0;
};

struct Scene {
  std::vector<SceneObject> objects;
  MeshAccel merged;              // union of all object meshes
  std::vector<int> face_owner;   // merged face index -> object_id
  Aabb bounds;
};

namespace detail {

inline void rebuild_merged(Scene& scene) {
  scene.merged.mesh = TriMesh{};
  scene.face_owner.clear();
  for (const SceneObject& obj : scene.objects) {
    append_mesh(scene.merged.mesh, obj.mesh);
    scene.face_owner.insert(scene.face_owner.end(), obj.mesh.faces.size(), obj.object_id);
  }
  scene.merged.bvh = build_bvh(scene.merged.mesh);
}

}  // namespace detail

inline Scene make_scene(std::vector<std::pair<std::string, TriMesh>> named_meshes) {
  if (named_meshes.empty()) throw Error("make_scene: no objects");
  Scene scene;
  for (const auto& [name, mesh] : named_meshes) {
    scene.bounds.expand(mesh_aabb(mesh));
  }
  int next_id = 0;
  for (auto& [name, mesh] : named_meshes) {
    SceneObject obj;
    obj.name = name;
    obj.structural = classify_structural(name, mesh, scene.bounds);
    obj.mesh = std::move(mesh);
    obj.bvh = build_bvh(obj.mesh);
    obj.object_id = next_id++;
    scene.objects.push_back(std::move(obj));
  }
  detail::rebuild_merged(scene);
  return scene;
}

inline std::optional<HitRecord> scene_ray_cast(const Scene& scene, const Ray& ray) {
  auto hit = ray_cast(scene.merged.mesh, scene.merged.bvh, ray);
  if (hit) hit->object_id = scene.face_owner[hit->face_index];
  return hit;
}

inline double scene_clearance(const Scene& scene, const Vec3& center, double radius) {
  return clearance(scene.merged.mesh, scene.merged.bvh, center, radius);
}

inline bool scene_point_visible(const Scene& scene, const Camera& cam, const Vec3& p) {
  return point_visible(cam, scene.merged.mesh, scene.merged.bvh, p);
}

// Merged accelerator over the structural subset only (the collision world the
// nominal corridor is simulated against).
inline MeshAccel structural_accel(const Scene& scene) {
  TriMesh merged;
  for (const SceneObject& obj : scene.objects) {
    if (obj.structural) append_mesh(merged, obj.mesh);
  }
  if (merged.faces.empty()) throw Error("structural_accel: scene has no structural geometry");
  MeshAccel accel;
  accel.mesh = std::move(merged);
  accel.bvh = build_bvh(accel.mesh);
  return accel;
}

}  // namespace trajpair
