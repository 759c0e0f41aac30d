#pragma once

// Deterministic software ray caster. One primary ray per pixel center, flat
// Lambertian shading with a single directional light, no shadows or bounces.
// Frames and binary masks come from the same nearest-hit pass.

#include <cstdint>
#include <utility>
#include <vector>

#include "trajpair/bvh.hpp"
#include "trajpair/camera.hpp"
#include "trajpair/mesh.hpp"
#include "trajpair/physics.hpp"
#include "trajpair/rng.hpp"
#include "trajpair/scene.hpp"

namespace trajpair {

struct FrameBuffer {
  int width = 0, height = 0;
  std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel

  const uint8_t* at(int x, int y) const { return &rgb[3 * (static_cast<size_t>(y) * width + x)]; }
  uint8_t* at(int x, int y) { return &rgb[3 * (static_cast<size_t>(y) * width + x)]; }
};

// 0 marks the foreground object, 255 the background.
struct MaskFrame {
  int width = 0, height = 0;
  std::vector<uint8_t> value;

  uint8_t at(int x, int y) const { return value[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return value[static_cast<size_t>(y) * width + x]; }
};

inline constexpr uint8_t kMaskForeground = 0;
inline constexpr uint8_t kMaskBackground = 255;
inline constexpr int kForegroundObjectId = 1000000;

struct RenderSettings {
  std::array<uint8_t, 3> background{36, 41, 48};
  Vec3 light_direction = normalized(Vec3{0.35, 0.25, 1.0});  // toward the light
  double light_intensity = 0.85;
  double ambient = 0.30;
};

// Stable per-object base color derived from the object id.
inline Vec3 albedo_for_object(int object_id) {
  uint64_t h = static_cast<uint64_t>(object_id) * 0x9E3779B97F4A7C15ull + 0x1234567;
  const double u0 = static_cast<double>(splitmix64_next(h) >> 11) * 0x1.0p-53;
  const double u1 = static_cast<double>(splitmix64_next(h) >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(splitmix64_next(h) >> 11) * 0x1.0p-53;
  return {0.25 + 0.6 * u0, 0.25 + 0.6 * u1, 0.25 + 0.6 * u2};
}

struct ObjectPose {
  Vec3 position;
  Quat orientation;
};

namespace detail {

inline uint8_t quantize(double v) {
  const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<uint8_t>(255.0 * c + 0.5);
}

inline void render_pass(const Scene& scene, const MeshAccel& posed_object, const Camera& cam,
                        const RenderSettings& settings, FrameBuffer* frame, MaskFrame* mask) {
  if (frame != nullptr) {
    frame->width = cam.width;
    frame->height = cam.height;
    frame->rgb.assign(static_cast<size_t>(cam.width) * cam.height * 3, 0);
  }
  if (mask != nullptr) {
    mask->width = cam.width;
    mask->height = cam.height;
    mask->value.assign(static_cast<size_t>(cam.width) * cam.height, kMaskBackground);
  }
  // Hoisted camera constants; the per-pixel expression tree matches pixel_ray
  // exactly so re-casting through the public API reproduces these rays.
  const double th = cam.tan_half_fov();
  const double aspect = cam.aspect();
  const Vec3 right = cam.right();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const double sx = (2.0 * (x + 0.5) / cam.width - 1.0) * th * aspect;
      const double sy = (1.0 - 2.0 * (y + 0.5) / cam.height) * th;
      Ray ray;
      ray.origin = cam.position;
      ray.direction = normalized(cam.forward + sx * right + sy * cam.up);
      const auto scene_hit = scene_ray_cast(scene, ray);
      const auto object_hit =
          ray_cast(posed_object.mesh, posed_object.bvh, ray, kForegroundObjectId);
      // The foreground wins exact-t ties.
      const bool use_object =
          object_hit && (!scene_hit || object_hit->t <= scene_hit->t);
      const HitRecord* hit = use_object ? &*object_hit : (scene_hit ? &*scene_hit : nullptr);
      if (mask != nullptr && use_object) mask->at(x, y) = kMaskForeground;
      if (frame == nullptr) continue;
      uint8_t* px = frame->at(x, y);
      if (hit == nullptr) {
        px[0] = settings.background[0];
        px[1] = settings.background[1];
        px[2] = settings.background[2];
        continue;
      }
      Vec3 n = hit->face_normal;
      if (dot(n, ray.direction) > 0.0) n = -n;  // two-sided shading
      const double lambert = std::fmax(0.0, dot(n, settings.light_direction));
      const double shade = settings.ambient + settings.light_intensity * lambert;
      const Vec3 albedo = albedo_for_object(hit->object_id);
      px[0] = quantize(albedo.x * shade);
      px[1] = quantize(albedo.y * shade);
      px[2] = quantize(albedo.z * shade);
    }
  }
}

inline MeshAccel pose_object(const TriMesh& object_mesh, const ObjectPose& pose) {
  return make_accel(transform_mesh(object_mesh, 1.0, pose.orientation, pose.position));
}

}  // namespace detail

inline FrameBuffer render_frame(const Scene& scene, const TriMesh& object_mesh,
                                const ObjectPose& pose, const Camera& cam,
                                const RenderSettings& settings) {
  const MeshAccel posed = detail::pose_object(object_mesh, pose);
  FrameBuffer frame;
  detail::render_pass(scene, posed, cam, settings, &frame, nullptr);
  return frame;
}

inline MaskFrame render_mask(const Scene& scene, const TriMesh& object_mesh,
                             const ObjectPose& pose, const Camera& cam) {
  const MeshAccel posed = detail::pose_object(object_mesh, pose);
  MaskFrame mask;
  detail::render_pass(scene, posed, cam, RenderSettings{}, nullptr, &mask);
  return mask;
}

// Renders frame i at trajectory pose i; frames and masks stay aligned 1:1.
inline std::pair<std::vector<FrameBuffer>, std::vector<MaskFrame>> render_video(
    const Scene& scene, const TriMesh& object_mesh, const Trajectory& trajectory,
    const Camera& cam, const RenderSettings& settings) {
  std::vector<FrameBuffer> frames;
  std::vector<MaskFrame> masks;
  frames.reserve(trajectory.frames.size());
  masks.reserve(trajectory.frames.size());
  for (const FramePose& pose : trajectory.frames) {
    const MeshAccel posed =
        detail::pose_object(object_mesh, {pose.position, pose.orientation});
    FrameBuffer frame;
    MaskFrame mask;
    detail::render_pass(scene, posed, cam, settings, &frame, &mask);
    frames.push_back(std::move(frame));
    masks.push_back(std::move(mask));
  }
  return {std::move(frames), std::move(masks)};
}

}  // namespace trajpair
