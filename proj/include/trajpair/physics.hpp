#pragma once

// Deterministic rigid-body simulation with a bounding-sphere proxy against
// static triangle-mesh scenes. Semi-implicit Euler at a fixed substep rate;
// contacts resolve by projecting the sphere out of penetration and applying a
// restitution + Coulomb-style impulse. Rolling orientation comes from a
// kinematic no-slip coupling at the contact.
//
// simulate() integrates in displacement space (offset from the initial
// position) and only touches absolute coordinates when querying the scene.
// Two runs whose initial positions differ by a constant offset therefore
// perform identical arithmetic wherever the relative geometry is identical,
// which is what keeps paired trajectories aligned to within rounding.

#include <cmath>
#include <cstdlib>
#include <optional>
#include <vector>

#include "trajpair/bvh.hpp"
#include "trajpair/error.hpp"
#include "trajpair/vec.hpp"

namespace trajpair {

struct SimConfig {
  double gravity = 9.81;  // m/s^2 along -Z
  int substep_hz = 240;
  double restitution = 0.4;
  double friction = 0.5;
  int frames = 81;
  double fps = 16.0;

  double dt() const { return 1.0 / substep_hz; }

  int substeps_per_frame() const {
    const double ratio = substep_hz / fps;
    const int n = static_cast<int>(std::lround(ratio));
    if (n < 1 || std::fabs(ratio - n) > 1e-9) {
      throw Error("SimConfig: substep_hz must be an integer multiple of fps");
    }
    return n;
  }
};

struct BodyState {
  Vec3 position;
  Quat orientation;
  Vec3 linear_velocity;
  Vec3 angular_velocity;
  double mass = 1.0;
  double proxy_radius = 0.1;
};

struct FramePose {
  Vec3 position;
  Quat orientation;
  bool contact = false;
};

struct Trajectory {
  std::vector<FramePose> frames;
};

enum class TaskKind { kDrop, kThrow, kRoll, kDrag, kStatic };

inline const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kDrop: return "drop";
    case TaskKind::kThrow: return "throw";
    case TaskKind::kRoll: return "roll";
    case TaskKind::kDrag: return "drag";
    case TaskKind::kStatic: return "static";
  }
  return "unknown";
}

enum class PathShape { kCircle, kSCurve, kSpiral };

// Planar drag path anchored at the trajectory's initial position. The curve
// lies in the horizontal plane through the anchor.
struct PathSpec {
  PathShape shape = PathShape::kCircle;
  Vec3 anchor;
  Vec3 heading{1, 0, 0};  // unit, horizontal
  double radius = 0.5;    // circle
  double length = 1.5;    // s-curve run along heading
  double amplitude = 0.3; // s-curve lateral swing
  double spiral_a = 0.1;  // archimedean r(theta) = a + b * theta
  double spiral_b = 0.04;
  double turns = 2.0;     // spiral revolutions
};

struct TaskSpec {
  TaskKind kind = TaskKind::kDrop;
  double throw_speed = 6.0;
  double roll_speed = 2.0;
  std::optional<PathSpec> drag_path;
  double spring_k = 50.0;  // per unit mass
  double spring_c = 10.0;  // per unit mass
  Vec3 heading{1, 0, 0};   // unit horizontal camera direction
};

inline Vec3 horizontal_unit(const Vec3& v) {
  const Vec3 h{v.x, v.y, 0.0};
  const double len = norm(h);
  if (len < 1e-9) throw Error("horizontal_unit: direction has no horizontal component");
  return h / len;
}

// Damped spring pull toward `target` with the vertical component zeroed
// (drag control is planar).
inline Vec3 drag_force(const Vec3& p, const Vec3& v, const Vec3& target, double k, double c) {
  Vec3 f = k * (target - p) - c * v;
  f.z = 0.0;
  return f;
}

// Point on the parametric drag curve at normalized progress s in [0, 1];
// s = 0 returns the anchor for every shape.
inline Vec3 path_point(const PathSpec& path, double s) {
  if (s < 0.0 || s > 1.0) throw Error("path_point: progress outside [0, 1]");
  constexpr double kTau = 6.283185307179586476925286766559;
  const Vec3 heading = path.heading;
  const Vec3 lateral = cross(Vec3{0, 0, 1}, heading);  // horizontal, left of heading
  switch (path.shape) {
    case PathShape::kCircle: {
      // Circle through the anchor; center sits one radius to the left.
      const Vec3 center = path.anchor + path.radius * lateral;
      const double a = kTau * s;
      return center - path.radius * std::cos(a) * lateral + path.radius * std::sin(a) * heading;
    }
    case PathShape::kSCurve: {
      // One full sine period, so s = 1 lands back on the heading axis.
      return path.anchor + (path.length * s) * heading +
             (path.amplitude * std::sin(kTau * s)) * lateral;
    }
    case PathShape::kSpiral: {
      const double theta_max = kTau * path.turns;
      const double theta = theta_max * s;
      const double r = path.spiral_a + path.spiral_b * theta;
      const Vec3 center = path.anchor - path.spiral_a * heading;
      return center + r * std::cos(theta) * heading + r * std::sin(theta) * lateral;
    }
  }
  throw Error("path_point: unknown shape");
}

struct StepResult {
  BodyState body;
  bool contact = false;
};

namespace detail {

// One substep in displacement space; `origin` maps displacements to world
// coordinates for scene queries only.
inline StepResult step_displaced(const Vec3& origin, BodyState body, const MeshAccel* scene,
                                 const Vec3& task_force, double dt, const SimConfig& cfg) {
  body.linear_velocity += (Vec3{0, 0, -cfg.gravity} + task_force / body.mass) * dt;
  body.position += body.linear_velocity * dt;

  bool contact = false;
  if (scene != nullptr) {
    for (int pass = 0; pass < 3; ++pass) {
      const SurfacePoint sp = closest_surface_point(scene->mesh, scene->bvh,
                                                    origin + body.position);
      const double c = sp.distance - body.proxy_radius;
      if (c >= 0.0) break;
      const Vec3 away = (origin + body.position) - sp.point;
      const double away_len = norm(away);
      const Vec3 face_n = scene->mesh.face_normals[sp.face_index];
      Vec3 n;
      if (away_len > 1e-12) {
        n = away / away_len;
        // Center slipped behind the surface: push back toward the front side.
        if (dot(n, face_n) < 0.0) n = -n;
      } else {
        n = face_n;
      }
      body.position += (-c) * n;
      contact = true;
      const double vn = dot(body.linear_velocity, n);
      if (vn < 0.0) {
        const double e = cfg.restitution;
        Vec3 vt = body.linear_velocity - vn * n;
        const double vt_len = norm(vt);
        const double keep =
            vt_len > 1e-12
                ? std::fmax(0.0, 1.0 - cfg.friction * (1.0 + e) * (-vn) / vt_len)
                : 0.0;
        vt *= keep;
        body.linear_velocity = (-e * vn) * n + vt;
        // No-slip rolling: the contact point of the sphere matches the
        // tangential surface speed.
        body.angular_velocity = cross(n, vt) / body.proxy_radius;
      }
    }
  }

  const double w = norm(body.angular_velocity);
  if (w > 1e-12) {
    body.orientation = quat_normalized(
        quat_mul(quat_from_axis_angle(body.angular_velocity / w, w * dt), body.orientation));
  }

  if (!is_finite(body.position) || !is_finite(body.linear_velocity) ||
      !is_finite(body.orientation)) {
    throw SimulationDiverged("step: non-finite body state");
  }
  return {body, contact};
}

}  // namespace detail

// Public single-substep entry point in world coordinates.
inline StepResult step(const BodyState& body, const MeshAccel* scene, const Vec3& task_force,
                       double dt, const SimConfig& cfg) {
  return detail::step_displaced(Vec3{0, 0, 0}, body, scene, task_force, dt, cfg);
}

// Runs the full clip. The initial linear velocity is derived from the task:
// drop and drag start at rest, throw and roll start along the camera heading
// (projected to horizontal / to the support plane), static disables dynamics.
inline Trajectory simulate(const BodyState& initial, const TaskSpec& task,
                           const MeshAccel* scene, const SimConfig& cfg,
                           std::optional<Vec3> support_normal = std::nullopt) {
  if (task.kind == TaskKind::kDrag && !task.drag_path.has_value()) {
    throw Error("simulate: drag task without a path");
  }

  const Vec3 origin = initial.position;
  BodyState body = initial;
  body.position = {0, 0, 0};
  body.angular_velocity = {0, 0, 0};

  switch (task.kind) {
    case TaskKind::kDrop:
    case TaskKind::kDrag:
    case TaskKind::kStatic:
      body.linear_velocity = {0, 0, 0};
      break;
    case TaskKind::kThrow:
      body.linear_velocity = task.throw_speed * horizontal_unit(task.heading);
      break;
    case TaskKind::kRoll: {
      const Vec3 n = support_normal.value_or(Vec3{0, 0, 1});
      const Vec3 in_plane = task.heading - dot(task.heading, n) * n;
      const double len = norm(in_plane);
      if (len < 1e-9) throw Error("simulate: roll heading parallel to support normal");
      body.linear_velocity = (task.roll_speed / len) * in_plane;
      break;
    }
  }

  const bool initial_contact =
      scene != nullptr &&
      clearance(scene->mesh, scene->bvh, origin, body.proxy_radius) <= 1e-4;

  Trajectory out;
  out.frames.reserve(cfg.frames);
  out.frames.push_back({origin, body.orientation, initial_contact});

  if (task.kind == TaskKind::kStatic) {
    for (int f = 1; f < cfg.frames; ++f) out.frames.push_back(out.frames.front());
    return out;
  }

  const int spf = cfg.substeps_per_frame();
  const double dt = cfg.dt();
  const double duration = cfg.frames / cfg.fps;
  int substep = 0;
  for (int f = 1; f < cfg.frames; ++f) {
    bool frame_contact = false;
    for (int k = 0; k < spf; ++k) {
      ++substep;
      Vec3 force{0, 0, 0};
      if (task.kind == TaskKind::kDrag) {
        const double s = std::fmin(1.0, substep * dt / duration);
        const PathSpec& path = *task.drag_path;
        const Vec3 target_local = path_point(path, s) - path.anchor;
        force = body.mass * drag_force(body.position, body.linear_velocity, target_local,
                                       task.spring_k, task.spring_c);
      }
      const StepResult result = detail::step_displaced(origin, body, scene, force, dt, cfg);
      body = result.body;
      frame_contact = frame_contact || result.contact;
    }
    out.frames.push_back({origin + body.position, body.orientation, frame_contact});
  }
  return out;
}

}  // namespace trajpair
