#pragma once

// Procedural indoor scenes: a floor slab, optional walls and ceiling (named
// with structural keywords), and box/table clutter placed non-overlapping on
// the floor, plus candidate cameras looking across the room.

#include <string>
#include <utility>
#include <vector>

#include "trajpair/camera.hpp"
#include "trajpair/mesh.hpp"
#include "trajpair/primitives.hpp"
#include "trajpair/rng.hpp"
#include "trajpair/scene.hpp"

namespace trajpair {

struct SceneSpec {
  double room_extent_lo = 4.0;  // sampled room side length range (meters)
  double room_extent_hi = 8.0;
  double wall_height = 2.8;
  bool walls = true;
  bool ceiling = false;
  int clutter_lo = 3;
  int clutter_hi = 8;
  double clutter_size_lo = 0.3;
  double clutter_size_hi = 1.1;
  int camera_lo = 1;
  int camera_hi = 4;
  double eye_height_lo = 1.2;
  double eye_height_hi = 1.8;
  double vertical_fov = 0.9599310885968813;  // 55 degrees
  int width = 320;
  int height = 180;
};

struct GeneratedScene {
  Scene scene;
  std::vector<Camera> cameras;
  std::vector<std::string> warnings;
  double room_width = 0.0;
  double room_depth = 0.0;
};

inline GeneratedScene generate_procedural_scene(Rng& rng, const SceneSpec& spec) {
  GeneratedScene out;
  const double room_w = rng.uniform(spec.room_extent_lo, spec.room_extent_hi);
  const double room_d = rng.uniform(spec.room_extent_lo, spec.room_extent_hi);
  out.room_width = room_w;
  out.room_depth = room_d;

  std::vector<std::pair<std::string, TriMesh>> objects;
  const double slab = 0.1;
  // Architectural surfaces are tessellated so the collision BVH partitions
  // them; see make_gridded_box_mesh.
  const double patch = 0.8;
  objects.emplace_back("floor",
                       transform_mesh(make_gridded_box_mesh(room_w, room_d, slab, patch), 1.0,
                                      Quat{}, {0, 0, -0.5 * slab}));
  if (spec.walls) {
    const double wz = 0.5 * spec.wall_height;
    objects.emplace_back(
        "wall_north", transform_mesh(make_gridded_box_mesh(room_w, slab, spec.wall_height, patch),
                                     1.0, Quat{}, {0, 0.5 * (room_d + slab), wz}));
    objects.emplace_back(
        "wall_south", transform_mesh(make_gridded_box_mesh(room_w, slab, spec.wall_height, patch),
                                     1.0, Quat{}, {0, -0.5 * (room_d + slab), wz}));
    objects.emplace_back(
        "wall_east", transform_mesh(make_gridded_box_mesh(slab, room_d, spec.wall_height, patch),
                                    1.0, Quat{}, {0.5 * (room_w + slab), 0, wz}));
    objects.emplace_back(
        "wall_west", transform_mesh(make_gridded_box_mesh(slab, room_d, spec.wall_height, patch),
                                    1.0, Quat{}, {-0.5 * (room_w + slab), 0, wz}));
  }
  if (spec.ceiling) {
    objects.emplace_back("ceiling",
                         transform_mesh(make_gridded_box_mesh(room_w, room_d, slab, patch), 1.0,
                                        Quat{}, {0, 0, spec.wall_height + 0.5 * slab}));
  }

  // Clutter placed on the floor without mutual overlap (axis-aligned check
  // with a small gap); exhausted budgets yield fewer objects plus a warning.
  struct Footprint {
    double x, y, half_x, half_y;
  };
  std::vector<Footprint> placed;
  const int clutter_target =
      spec.clutter_lo + (spec.clutter_hi > spec.clutter_lo
                             ? rng.uniform_int(spec.clutter_hi - spec.clutter_lo + 1)
                             : 0);
  static const char* kClutterNames[] = {"crate", "chair", "table", "stool", "lamp_base"};
  int placed_count = 0;
  for (int i = 0; i < clutter_target; ++i) {
    const int kind = rng.uniform_int(5);
    const std::string base = kClutterNames[kind];
    const double sx = rng.uniform(spec.clutter_size_lo, spec.clutter_size_hi);
    const double sy = rng.uniform(spec.clutter_size_lo, spec.clutter_size_hi);
    const double sz = rng.uniform(spec.clutter_size_lo, spec.clutter_size_hi);
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      const double margin_x = 0.5 * sx + 0.3;
      const double margin_y = 0.5 * sy + 0.3;
      if (room_w / 2 - margin_x <= 0 || room_d / 2 - margin_y <= 0) break;
      const double x = rng.uniform(-(room_w / 2 - margin_x), room_w / 2 - margin_x);
      const double y = rng.uniform(-(room_d / 2 - margin_y), room_d / 2 - margin_y);
      bool overlaps = false;
      for (const Footprint& f : placed) {
        if (std::fabs(x - f.x) < 0.5 * sx + f.half_x + 0.1 &&
            std::fabs(y - f.y) < 0.5 * sy + f.half_y + 0.1) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) continue;
      TriMesh mesh = base == "table" ? make_table_mesh(sx, sy, std::fmax(0.5, sz * 0.7))
                                     : make_box_mesh(sx, sy, sz);
      const double height = mesh_aabb(mesh).extent().z;
      objects.emplace_back(base + "_" + std::to_string(i),
                           transform_mesh(mesh, 1.0, Quat{}, {x, y, 0.5 * height}));
      placed.push_back({x, y, 0.5 * sx, 0.5 * sy});
      ++placed_count;
      ok = true;
    }
    if (!ok) out.warnings.push_back("clutter placement budget exhausted for item " +
                                    std::to_string(i));
  }
  (void)placed_count;

  out.scene = make_scene(std::move(objects));

  const int camera_count =
      spec.camera_lo + (spec.camera_hi > spec.camera_lo
                            ? rng.uniform_int(spec.camera_hi - spec.camera_lo + 1)
                            : 0);
  for (int i = 0; i < camera_count; ++i) {
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const double ring = rng.uniform(0.32, 0.44);
    const Vec3 eye{ring * room_w * std::cos(angle), ring * room_d * std::sin(angle),
                   rng.uniform(spec.eye_height_lo, spec.eye_height_hi)};
    const Vec3 target{rng.uniform(-0.15 * room_w, 0.15 * room_w),
                      rng.uniform(-0.15 * room_d, 0.15 * room_d), rng.uniform(0.2, 0.9)};
    out.cameras.push_back(make_camera(eye, target, {0, 0, 1}, spec.vertical_fov, spec.width,
                                      spec.height));
  }
  return out;
}

}  // namespace trajpair
