#pragma once

// First-frame placement sampling: visible, non-penetrating positions in the
// air or resting on a support surface, paired source/target placements with a
// shared scale, and screen-size driven scale solving.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "trajpair/camera.hpp"
#include "trajpair/error.hpp"
#include "trajpair/mesh.hpp"
#include "trajpair/physics.hpp"
#include "trajpair/rng.hpp"
#include "trajpair/scene.hpp"

namespace trajpair {

enum class PlacementMode { kAir, kGround };

inline PlacementMode placement_mode_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::kDrop:
    case TaskKind::kThrow:
      return PlacementMode::kAir;
    case TaskKind::kRoll:
    case TaskKind::kDrag:
    case TaskKind::kStatic:
      return PlacementMode::kGround;
  }
  return PlacementMode::kAir;
}

struct Placement {
  Vec3 position;  // object center
  PlacementMode mode = PlacementMode::kAir;
  std::optional<Vec3> support_normal;  // ground mode only
  double px = 0.0, py = 0.0;           // sampled pixel center
  double depth = 0.0;                  // distance along the sampling ray
  int support_object_id = -1;
  Vec3 support_point;  // surface point the object rests on (ground mode)
};

struct PlacementPair {
  Placement source;
  Placement target;
  double scale = 1.0;
  Vec3 delta;  // target.position - source.position
};

struct PlacementConfig {
  double clearance_margin = 0.02;
  int retry_budget = 256;
  double air_band_lo = 0.2;       // fraction of the ray's hit distance
  double air_band_hi = 0.8;
  double air_fallback_lo = 0.5;   // meters, when the ray escapes the scene
  double air_fallback_hi = 4.0;
  double depth_sigma_frac = 0.1;  // target air depth ~ N(src, frac * src)
  double support_min_up = 0.95;
  double scale_fraction_lo = 0.07;
  double scale_fraction_hi = 0.20;
  int scale_budget = 8;
  int pair_budget = 32;
  double provisional_radius = 0.08;
};

struct ValidationResult {
  bool ok = true;
  std::string failed_check;  // "visibility" | "clearance" | "support_normal"
};

inline double proxy_radius_for(const TriMesh& object_mesh, double scale) {
  return 0.5 * mesh_aabb(object_mesh).max_extent() * scale;
}

namespace detail {

// Clearance rule: air placements need the full margin everywhere; ground
// placements are in contact with their support object by construction, so the
// margin applies to every other object and the support only rejects actual
// penetration.
inline ValidationResult validate_radius(const Scene& scene, const Camera& cam,
                                        const Placement& placement, double radius,
                                        const PlacementConfig& pc) {
  if (!scene_point_visible(scene, cam, placement.position)) {
    return {false, "visibility"};
  }
  if (placement.mode == PlacementMode::kAir) {
    if (scene_clearance(scene, placement.position, radius) < pc.clearance_margin) {
      return {false, "clearance"};
    }
  } else {
    for (const SceneObject& obj : scene.objects) {
      const double c = clearance(obj.mesh, obj.bvh, placement.position, radius);
      if (obj.object_id == placement.support_object_id) {
        if (c < -1e-6) return {false, "clearance"};
      } else if (c < pc.clearance_margin) {
        return {false, "clearance"};
      }
    }
    if (!placement.support_normal.has_value() ||
        dot(*placement.support_normal, Vec3{0, 0, 1}) < pc.support_min_up) {
      return {false, "support_normal"};
    }
  }
  return {true, ""};
}

}  // namespace detail

inline ValidationResult validate_placement(const Scene& scene, const Camera& cam,
                                           const TriMesh& object_mesh,
                                           const Placement& placement, double scale,
                                           const PlacementConfig& pc = {}) {
  return detail::validate_radius(scene, cam, placement, proxy_radius_for(object_mesh, scale),
                                 pc);
}

inline Placement sample_air_placement(Rng& rng, const Scene& scene, const Camera& cam,
                                      double proxy_radius, const PlacementConfig& pc = {}) {
  for (int attempt = 0; attempt < pc.retry_budget; ++attempt) {
    const double px = rng.uniform_int(cam.width) + 0.5;
    const double py = rng.uniform_int(cam.height) + 0.5;
    const Ray ray = pixel_ray(cam, px, py);
    const auto hit = scene_ray_cast(scene, ray);
    const double depth = hit ? rng.uniform(pc.air_band_lo * hit->t, pc.air_band_hi * hit->t)
                             : rng.uniform(pc.air_fallback_lo, pc.air_fallback_hi);
    Placement p;
    p.position = ray.origin + depth * ray.direction;
    p.mode = PlacementMode::kAir;
    p.px = px;
    p.py = py;
    p.depth = depth;
    if (detail::validate_radius(scene, cam, p, proxy_radius, pc).ok) return p;
  }
  throw PlacementError("no-valid-placement: air retry budget exhausted");
}

inline Placement sample_ground_placement(Rng& rng, const Scene& scene, const Camera& cam,
                                         double proxy_radius, const PlacementConfig& pc = {}) {
  for (int attempt = 0; attempt < pc.retry_budget; ++attempt) {
    const double px = rng.uniform_int(cam.width) + 0.5;
    const double py = rng.uniform_int(cam.height) + 0.5;
    const Ray ray = pixel_ray(cam, px, py);
    const auto hit = scene_ray_cast(scene, ray);
    if (!hit) continue;
    if (dot(hit->face_normal, Vec3{0, 0, 1}) < pc.support_min_up) continue;
    Placement p;
    p.position = hit->point + proxy_radius * hit->face_normal;
    p.mode = PlacementMode::kGround;
    p.support_normal = hit->face_normal;
    p.px = px;
    p.py = py;
    p.depth = hit->t;
    p.support_object_id = hit->object_id;
    p.support_point = hit->point;
    if (detail::validate_radius(scene, cam, p, proxy_radius, pc).ok) return p;
  }
  throw PlacementError("no-valid-placement: ground retry budget exhausted");
}

namespace detail {

// Continuous screen extent of the mesh scaled by `scale` and centered at
// `center` with identity orientation. Returns the max side in pixels and
// whether the box lies fully inside the frame.
inline bool projected_max_side(const Camera& cam, const TriMesh& object_mesh,
                               const Vec3& center, double scale, double* side) {
  std::vector<Vec3> points;
  points.reserve(object_mesh.vertices.size());
  for (const Vec3& v : object_mesh.vertices) points.push_back(center + scale * v);
  const auto bounds = screen_bounds_continuous(cam, points);
  if (!bounds) return false;
  const auto [x0, y0, x1, y1] = *bounds;
  *side = std::fmax(x1 - x0, y1 - y0);
  return x0 >= 0.0 && y0 >= 0.0 && x1 < cam.width && y1 < cam.height;
}

// Solves for the scale whose projected max side is fraction * frame height,
// to within a quarter pixel. One proportionality step converges almost
// exactly; the loop covers perspective nonlinearity.
inline double solve_scale_for_fraction(const Camera& cam, const TriMesh& object_mesh,
                                       const Vec3& center, double fraction,
                                       const PlacementConfig& pc) {
  const double target = fraction * cam.height;
  double side1 = 0.0;
  projected_max_side(cam, object_mesh, center, 1.0, &side1);
  if (!(side1 > 1e-9)) throw PlacementError("scale unattainable: degenerate projection");
  double scale = target / side1;
  for (int it = 0; it < pc.scale_budget; ++it) {
    double side = 0.0;
    const bool inside = projected_max_side(cam, object_mesh, center, scale, &side);
    if (!(side > 1e-9)) throw PlacementError("scale unattainable: degenerate projection");
    if (std::fabs(side - target) <= 0.25) {
      if (!inside) throw PlacementError("scale unattainable: object exceeds frame");
      return scale;
    }
    scale *= target / side;
  }
  throw PlacementError("scale unattainable: no convergence");
}

}  // namespace detail

// Draws a screen fraction in [7%, 20%] of the frame height and solves for the
// matching world scale at the placement; redraws the fraction when the box
// cannot fit the frame.
inline double choose_scale(Rng& rng, const Camera& cam, const TriMesh& object_mesh,
                           const Placement& placement, const PlacementConfig& pc = {}) {
  std::string last = "scale unattainable";
  for (int attempt = 0; attempt < pc.scale_budget; ++attempt) {
    const double fraction = rng.uniform(pc.scale_fraction_lo, pc.scale_fraction_hi);
    try {
      return detail::solve_scale_for_fraction(cam, object_mesh, placement.position, fraction,
                                              pc);
    } catch (const PlacementError& e) {
      last = e.what();
    }
  }
  throw PlacementError(last);
}

namespace detail {

inline Placement sample_air_target(Rng& rng, const Scene& scene, const Camera& cam,
                                   double proxy_radius, double source_depth,
                                   const PlacementConfig& pc) {
  for (int attempt = 0; attempt < pc.retry_budget; ++attempt) {
    const double px = rng.uniform_int(cam.width) + 0.5;
    const double py = rng.uniform_int(cam.height) + 0.5;
    const Ray ray = pixel_ray(cam, px, py);
    const auto hit = scene_ray_cast(scene, ray);
    const double lo = hit ? pc.air_band_lo * hit->t : pc.air_fallback_lo;
    const double hi = hit ? pc.air_band_hi * hit->t : pc.air_fallback_hi;
    // Gaussian depth coupled to the source, truncated to the visible band.
    double depth = 0.0;
    bool found = false;
    for (int k = 0; k < 16; ++k) {
      depth = rng.normal(source_depth, pc.depth_sigma_frac * source_depth);
      if (depth >= lo && depth <= hi) {
        found = true;
        break;
      }
    }
    if (!found) continue;
    Placement p;
    p.position = ray.origin + depth * ray.direction;
    p.mode = PlacementMode::kAir;
    p.px = px;
    p.py = py;
    p.depth = depth;
    if (validate_radius(scene, cam, p, proxy_radius, pc).ok) return p;
  }
  throw PlacementError("no-valid-placement: air target retry budget exhausted");
}

}  // namespace detail

// Paired source/target placements with one shared scale. Ground pairs sample
// both sides independently; air pairs couple the target depth to the source
// through a truncated Gaussian while pixels stay independent.
inline PlacementPair sample_pair(Rng& rng, const Scene& scene, const Camera& cam,
                                 const TaskSpec& task, const TriMesh& object_mesh,
                                 const PlacementConfig& pc = {}) {
  const PlacementMode mode = placement_mode_for(task.kind);
  const double unit_extent = mesh_aabb(object_mesh).max_extent();
  std::string last = "no-valid-placement";
  for (int attempt = 0; attempt < pc.pair_budget; ++attempt) {
    try {
      double radius = pc.provisional_radius;
      Placement source = mode == PlacementMode::kAir
                             ? sample_air_placement(rng, scene, cam, radius, pc)
                             : sample_ground_placement(rng, scene, cam, radius, pc);
      const double fraction = rng.uniform(pc.scale_fraction_lo, pc.scale_fraction_hi);
      double scale = 0.0;
      // The proxy radius depends on the scale and (for ground placements) the
      // rest height depends on the radius; a couple of fixed-point rounds
      // settle both.
      for (int it = 0; it < 4; ++it) {
        if (mode == PlacementMode::kGround) {
          source.position = source.support_point + radius * (*source.support_normal);
        }
        scale = detail::solve_scale_for_fraction(cam, object_mesh, source.position, fraction,
                                                 pc);
        const double new_radius = 0.5 * unit_extent * scale;
        const bool settled = std::fabs(new_radius - radius) < 1e-6;
        radius = new_radius;
        if (settled) break;
      }
      if (mode == PlacementMode::kGround) {
        source.position = source.support_point + radius * (*source.support_normal);
      }
      if (!detail::validate_radius(scene, cam, source, radius, pc).ok) continue;

      Placement target = mode == PlacementMode::kGround
                             ? sample_ground_placement(rng, scene, cam, radius, pc)
                             : detail::sample_air_target(rng, scene, cam, radius,
                                                         source.depth, pc);
      if (!detail::validate_radius(scene, cam, target, radius, pc).ok) continue;

      PlacementPair pair;
      pair.source = source;
      pair.target = target;
      pair.scale = scale;
      pair.delta = target.position - source.position;
      return pair;
    } catch (const PlacementError& e) {
      last = e.what();
    }
  }
  throw PlacementError(last);
}

}  // namespace trajpair
