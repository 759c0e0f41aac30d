#pragma once

// Online scene modification: build a corridor around the nominal trajectories
// of both pair members (simulated against structural geometry only, so the
// corridor does not depend on the clutter it is about to remove), then drop
// every non-structural object that intersects it.

#include <cmath>
#include <utility>
#include <vector>

#include "trajpair/physics.hpp"
#include "trajpair/placement.hpp"
#include "trajpair/scene.hpp"

namespace trajpair {

// Swept tube of spheres. Centers are densified within each trajectory run so
// consecutive samples are at most one radius apart; `run_starts` marks where
// an independent run begins (the source and target trajectories are separate
// runs, never bridged).
struct Corridor {
  std::vector<Vec3> centers;
  double radius = 0.0;
  std::vector<int> run_starts;
};

inline constexpr double kCorridorRadiusFactor = 1.25;

namespace detail {

inline void append_corridor_run(Corridor& corridor, const Trajectory& trajectory,
                                double max_spacing) {
  corridor.run_starts.push_back(static_cast<int>(corridor.centers.size()));
  Vec3 prev;
  bool have_prev = false;
  for (const FramePose& pose : trajectory.frames) {
    if (have_prev) {
      const double gap = distance(prev, pose.position);
      if (gap < 1e-12) continue;  // static stretches collapse to one sample
      const int segments = static_cast<int>(std::ceil(gap / max_spacing));
      for (int k = 1; k < segments; ++k) {
        corridor.centers.push_back(prev + (static_cast<double>(k) / segments) *
                                              (pose.position - prev));
      }
    }
    corridor.centers.push_back(pose.position);
    prev = pose.position;
    have_prev = true;
  }
}

}  // namespace detail

inline Corridor nominal_corridor(const TaskSpec& task, const PlacementPair& pair,
                                 double proxy_radius, const Scene& scene,
                                 const SimConfig& cfg) {
  const MeshAccel structural = structural_accel(scene);
  Corridor corridor;
  corridor.radius = kCorridorRadiusFactor * proxy_radius;
  // Spacing tight enough that the swept tube covers the full proxy radius
  // between samples: distance-to-clutter >= radius - spacing/2 >= proxy_radius.
  const double max_spacing =
      std::fmin(corridor.radius, 2.0 * (corridor.radius - proxy_radius));

  const auto run = [&](const Placement& placement) {
    BodyState body;
    body.position = placement.position;
    body.proxy_radius = proxy_radius;
    return simulate(body, task, &structural, cfg, placement.support_normal);
  };
  detail::append_corridor_run(corridor, run(pair.source), max_spacing);
  detail::append_corridor_run(corridor, run(pair.target), max_spacing);
  return corridor;
}

// Removes every non-structural object that comes within the corridor radius of
// any corridor center. Structural objects are always kept; nothing is added.
inline Scene filter_scene(const Scene& scene, const Corridor& corridor) {
  Scene out;
  out.bounds = scene.bounds;
  for (const SceneObject& obj : scene.objects) {
    bool keep = true;
    if (!obj.structural) {
      for (const Vec3& center : corridor.centers) {
        if (clearance(obj.mesh, obj.bvh, center, corridor.radius) < 0.0) {
          keep = false;
          break;
        }
      }
    }
    if (keep) out.objects.push_back(obj);
  }
  detail::rebuild_merged(out);
  return out;
}

}  // namespace trajpair
