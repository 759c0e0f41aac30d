#pragma once

// Pinhole camera. Continuous pixel coordinates with pixel centers at
// half-integers; (0, 0) is the top-left frame corner and y grows downward.
// Screen-right is cross(forward, up).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "trajpair/bvh.hpp"
#include "trajpair/error.hpp"
#include "trajpair/vec.hpp"

namespace trajpair {

struct Camera {
  Vec3 position;
  Vec3 forward;  // unit
  Vec3 up;       // unit, perpendicular to forward
  double vertical_fov = 0.9;
  int width = 320;
  int height = 180;

  Vec3 right() const { return cross(forward, up); }
  double tan_half_fov() const { return std::tan(0.5 * vertical_fov); }
  double aspect() const { return static_cast<double>(width) / height; }
  // Focal length in pixel units.
  double focal_px() const { return 0.5 * height / tan_half_fov(); }
};

inline Camera make_camera(const Vec3& position, const Vec3& look_at, const Vec3& up_hint,
                          double vertical_fov, int width, int height) {
  if (width < 16 || height < 16) throw Error("make_camera: resolution below 16 px");
  if (!(vertical_fov > 0.0) || !(vertical_fov < 3.14159265358979323846)) {
    throw Error("make_camera: vertical fov outside (0, pi)");
  }
  const Vec3 gaze = look_at - position;
  if (norm(gaze) < 1e-12) throw Error("make_camera: look_at coincides with position");
  const Vec3 forward = normalized(gaze);
  const Vec3 up_raw = up_hint - forward * dot(forward, up_hint);
  if (norm(up_raw) < 1e-9) throw Error("make_camera: up parallel to view direction");
  Camera cam;
  cam.position = position;
  cam.forward = forward;
  cam.up = normalized(up_raw);
  cam.vertical_fov = vertical_fov;
  cam.width = width;
  cam.height = height;
  return cam;
}

struct Bbox2D {
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  int max_side() const { return std::max(x_max - x_min, y_max - y_min); }
  long long area() const {
    // Inclusive-coordinate convention: a degenerate box covers one pixel.
    return static_cast<long long>(x_max - x_min + 1) * (y_max - y_min + 1);
  }
};

inline Ray pixel_ray(const Camera& cam, double px, double py) {
  if (px < 0.0 || px >= cam.width || py < 0.0 || py >= cam.height) {
    throw Error("pixel_ray: pixel outside frame");
  }
  const double th = cam.tan_half_fov();
  const double sx = (2.0 * px / cam.width - 1.0) * th * cam.aspect();
  const double sy = (1.0 - 2.0 * py / cam.height) * th;
  Ray ray;
  ray.origin = cam.position;
  ray.direction = normalized(cam.forward + sx * cam.right() + sy * cam.up);
  return ray;
}

// Continuous pixel coordinates of p; absent when at or behind the camera plane.
inline std::optional<std::array<double, 2>> project_point(const Camera& cam, const Vec3& p) {
  const Vec3 d = p - cam.position;
  const double depth = dot(d, cam.forward);
  if (depth <= 1e-9) return std::nullopt;
  const double th = cam.tan_half_fov();
  const double px = (dot(d, cam.right()) / (depth * th * cam.aspect()) + 1.0) * 0.5 * cam.width;
  const double py = (1.0 - dot(d, cam.up) / (depth * th)) * 0.5 * cam.height;
  return std::array<double, 2>{px, py};
}

// Tight continuous bounds over projections of points in front of the camera.
inline std::optional<std::array<double, 4>> screen_bounds_continuous(
    const Camera& cam, const std::vector<Vec3>& points) {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const Vec3& p : points) {
    const auto proj = project_point(cam, p);
    if (!proj) continue;
    any = true;
    x0 = std::fmin(x0, (*proj)[0]);
    y0 = std::fmin(y0, (*proj)[1]);
    x1 = std::fmax(x1, (*proj)[0]);
    y1 = std::fmax(y1, (*proj)[1]);
  }
  if (!any) return std::nullopt;
  return std::array<double, 4>{x0, y0, x1, y1};
}

// Inclusive pixel box over the points' projections, clipped to the frame.
// Absent when all points are behind the camera or the box has no on-frame
// extent.
inline std::optional<Bbox2D> screen_bbox(const Camera& cam, const std::vector<Vec3>& points) {
  if (points.empty()) throw Error("screen_bbox: empty point list");
  const auto bounds = screen_bounds_continuous(cam, points);
  if (!bounds) return std::nullopt;
  const auto [x0, y0, x1, y1] = *bounds;
  if (x1 < 0.0 || y1 < 0.0 || x0 >= cam.width || y0 >= cam.height) return std::nullopt;
  Bbox2D box;
  box.x_min = std::clamp(static_cast<int>(std::floor(x0)), 0, cam.width - 1);
  box.y_min = std::clamp(static_cast<int>(std::floor(y0)), 0, cam.height - 1);
  box.x_max = std::clamp(static_cast<int>(std::floor(x1)), 0, cam.width - 1);
  box.y_max = std::clamp(static_cast<int>(std::floor(y1)), 0, cam.height - 1);
  return box;
}

// True iff p projects inside the frame and the segment camera->p is free of
// scene geometry (up to a small slack before p).
inline bool point_visible(const Camera& cam, const TriMesh& scene_mesh, const Bvh& scene_bvh,
                          const Vec3& p) {
  const auto proj = project_point(cam, p);
  if (!proj) return false;
  if ((*proj)[0] < 0.0 || (*proj)[0] >= cam.width || (*proj)[1] < 0.0 ||
      (*proj)[1] >= cam.height) {
    return false;
  }
  const Vec3 d = p - cam.position;
  const double dist = norm(d);
  if (dist < 1e-9) return true;
  Ray ray;
  ray.origin = cam.position;
  ray.direction = d / dist;
  ray.t_max = dist - 1e-4;
  if (ray.t_max <= kRayEpsilon) return true;
  return !ray_cast(scene_mesh, scene_bvh, ray).has_value();
}

}  // namespace trajpair
