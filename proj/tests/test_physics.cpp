#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "support/test_util.hpp"
#include "trajpair/bvh.hpp"
#include "trajpair/physics.hpp"
#include "trajpair/primitives.hpp"

using namespace trajpair;

namespace {

MeshAccel floor_accel(double half = 12.0) {
  return make_accel(transform_mesh(make_box_mesh(2 * half, 2 * half, 0.1), 1.0, Quat{},
                                   {0, 0, -0.05}));
}

BodyState sphere_at(const Vec3& p, double radius = 0.1) {
  BodyState body;
  body.position = p;
  body.proxy_radius = radius;
  return body;
}

}  // namespace

TEST_CASE("step: one free-space substep from rest is the semi-implicit update") {
  SimConfig cfg;
  const double dt = cfg.dt();
  const StepResult r = step(sphere_at({0, 0, 5}), nullptr, {0, 0, 0}, dt, cfg);
  CHECK(r.body.linear_velocity.z == doctest::Approx(-cfg.gravity * dt).epsilon(1e-12));
  CHECK(r.body.position.z - 5.0 == doctest::Approx(-cfg.gravity * dt * dt).epsilon(1e-12));
  CHECK_FALSE(r.contact);
}

TEST_CASE("step: restitution law on an isolated floor impact") {
  const MeshAccel floor = floor_accel();
  for (const double e : {0.0, 0.4, 0.9}) {
    SimConfig cfg;
    cfg.gravity = 0.0;  // isolate the impulse from the gravity update
    cfg.restitution = e;
    const double v0 = 3.0;
    BodyState body = sphere_at({0, 0, 0.1 + v0 * cfg.dt() * 0.5});
    body.linear_velocity = {0, 0, -v0};
    const StepResult r = step(body, &floor, {0, 0, 0}, cfg.dt(), cfg);
    REQUIRE(r.contact);
    CHECK(std::fabs(r.body.linear_velocity.z / v0 - e) <= 1e-6);
  }
}

TEST_CASE("step: restitution with gravity reconstructs to the same law") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  cfg.restitution = 0.4;
  const double dt = cfg.dt();
  BodyState body = sphere_at({0.3, -0.2, 0.1 + 0.003});
  body.linear_velocity = {0, 0, -2.0};
  for (int i = 0; i < 10; ++i) {
    const Vec3 v_pre = body.linear_velocity;
    const StepResult r = step(body, &floor, {0, 0, 0}, dt, cfg);
    if (r.contact) {
      const double v_in = v_pre.z - cfg.gravity * dt;  // velocity entering the impulse
      CHECK(r.body.linear_velocity.z == doctest::Approx(-cfg.restitution * v_in).epsilon(1e-9));
      return;
    }
    body = r.body;
  }
  FAIL("no contact within 10 substeps");
}

TEST_CASE("step: resting contact leaves the position unchanged") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  const BodyState body = sphere_at({0.5, 0.5, 0.1});
  const StepResult r = step(body, &floor, {0, 0, 0}, cfg.dt(), cfg);
  CHECK(norm(r.body.position - body.position) <= 1e-9);
}

TEST_CASE("simulate: drop matches the closed-form semi-implicit recurrence pre-contact") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  const double dt = cfg.dt();
  const int spf = cfg.substeps_per_frame();
  const double z0 = 2.0;
  TaskSpec task;
  task.kind = TaskKind::kDrop;
  const Trajectory traj = simulate(sphere_at({0.2, -0.4, z0}), task, &floor, cfg);
  REQUIRE(traj.frames.size() == 81);
  for (int f = 0; f < cfg.frames; ++f) {
    if (traj.frames[f].contact) break;
    const double n = static_cast<double>(f) * spf;
    const double expected = z0 - 0.5 * cfg.gravity * dt * dt * n * (n + 1);
    CHECK(std::fabs(traj.frames[f].position.z - expected) <= 1e-9);
    CHECK(traj.frames[f].position.x == doctest::Approx(0.2));
  }
  CHECK(traj.frames[0].position.z == z0);
}

TEST_CASE("simulate: static task never moves") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  TaskSpec task;
  task.kind = TaskKind::kStatic;
  const BodyState body = sphere_at({0.3, 0.1, 0.1});
  const Trajectory traj = simulate(body, task, &floor, cfg);
  REQUIRE(traj.frames.size() == 81);
  for (const FramePose& pose : traj.frames) {
    CHECK(norm(pose.position - body.position) == 0.0);
    CHECK(pose.orientation.w == 1.0);
  }
}

TEST_CASE("simulate: throw follows the ballistic estimate until impact") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  const double r = 0.1;
  const double h = 1.2;  // center height above rest
  TaskSpec task;
  task.kind = TaskKind::kThrow;
  task.heading = {1, 0, 0};

  // Substep-resolution contact time via the public step function.
  BodyState body = sphere_at({0, 0, r + h}, r);
  body.linear_velocity = task.throw_speed * horizontal_unit(task.heading);
  int contact_substep = -1;
  for (int n = 1; n <= 2000; ++n) {
    const StepResult s = step(body, &floor, {0, 0, 0}, cfg.dt(), cfg);
    body = s.body;
    if (s.contact) {
      contact_substep = n;
      break;
    }
  }
  REQUIRE(contact_substep > 0);
  const double t_contact = contact_substep * cfg.dt();
  const double t_expected = std::sqrt(2.0 * h / cfg.gravity);
  CHECK(std::fabs(t_contact - t_expected) <= 2.0 * cfg.dt());
  const double travelled = std::hypot(body.position.x, body.position.y);
  CHECK(travelled == doctest::Approx(task.throw_speed * t_expected).epsilon(0.05));
}

TEST_CASE("drag_force formula") {
  const Vec3 zero = drag_force({1, 2, 3}, {0, 0, 0}, {1, 2, 3}, 50, 10);
  CHECK(norm(zero) == 0.0);

  const Vec3 pull = drag_force({-1, 0, 0}, {0, 0, 0}, {0, 0, 0}, 50, 10);
  CHECK(pull.x == doctest::Approx(50.0));
  CHECK(pull.y == 0.0);
  CHECK(pull.z == 0.0);

  const Vec3 damped = drag_force({0, 0, 0}, {0, 2, 5}, {0, 0, 0}, 50, 10);
  CHECK(damped.x == 0.0);
  CHECK(damped.y == doctest::Approx(-20.0));
  CHECK(damped.z == 0.0);  // vertical component zeroed
}

TEST_CASE("path_point shapes") {
  PathSpec circle;
  circle.shape = PathShape::kCircle;
  circle.anchor = {1, 2, 0.5};
  circle.heading = {1, 0, 0};
  circle.radius = 0.6;
  CHECK(norm(path_point(circle, 0.0) - circle.anchor) <= 1e-12);
  CHECK(norm(path_point(circle, 0.5) - circle.anchor) == doctest::Approx(2 * circle.radius));
  CHECK(path_point(circle, 0.25).z == doctest::Approx(0.5));

  PathSpec scurve;
  scurve.shape = PathShape::kSCurve;
  scurve.anchor = {0, 0, 0.3};
  scurve.heading = {0, 1, 0};
  scurve.length = 1.4;
  scurve.amplitude = 0.3;
  const Vec3 end = path_point(scurve, 1.0);
  CHECK(norm(end - (scurve.anchor + scurve.length * scurve.heading)) <= 1e-9);
  CHECK(norm(path_point(scurve, 0.0) - scurve.anchor) <= 1e-12);

  PathSpec spiral;
  spiral.shape = PathShape::kSpiral;
  spiral.anchor = {2, -1, 0.2};
  spiral.heading = {1, 0, 0};
  spiral.spiral_a = 0.1;
  spiral.spiral_b = 0.05;
  spiral.turns = 2.0;
  const double theta_max = 2.0 * 3.14159265358979323846 * spiral.turns;
  const Vec3 center = spiral.anchor - spiral.spiral_a * spiral.heading;
  CHECK(norm(path_point(spiral, 0.0) - spiral.anchor) <= 1e-12);
  CHECK(norm(path_point(spiral, 1.0) - center) ==
        doctest::Approx(spiral.spiral_a + spiral.spiral_b * theta_max));

  CHECK_THROWS_AS(path_point(circle, -0.01), Error);
  CHECK_THROWS_AS(path_point(circle, 1.01), Error);
}

TEST_CASE("simulate: drag requires a path and follows it loosely") {
  SimConfig cfg;
  TaskSpec task;
  task.kind = TaskKind::kDrag;
  CHECK_THROWS_AS(simulate(sphere_at({0, 0, 0.1}), task, nullptr, cfg), Error);

  PathSpec circle;
  circle.shape = PathShape::kCircle;
  circle.anchor = {0, 0, 0.1};
  circle.heading = {1, 0, 0};
  circle.radius = 0.5;
  task.drag_path = circle;
  const MeshAccel floor = floor_accel();
  const Trajectory traj = simulate(sphere_at({0, 0, 0.1}), task, &floor, cfg,
                                   Vec3{0, 0, 1});
  // The spring keeps the object within a fraction of the path radius of the
  // moving target for most of the clip.
  const double duration = cfg.frames / cfg.fps;
  int close = 0;
  for (int f = 10; f < cfg.frames; ++f) {
    const double s = std::fmin(1.0, (f / cfg.fps) / duration);
    const Vec3 target = path_point(circle, s);
    const Vec3 p = traj.frames[f].position;
    if (std::hypot(p.x - target.x, p.y - target.y) < 0.4) ++close;
  }
  CHECK(close > 55);
}

TEST_CASE("simulate: bitwise determinism") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  TaskSpec task;
  task.kind = TaskKind::kThrow;
  task.heading = {0.6, 0.8, 0};
  const BodyState body = sphere_at({0.1, -0.3, 1.4});
  const Trajectory a = simulate(body, task, &floor, cfg);
  const Trajectory b = simulate(body, task, &floor, cfg);
  REQUIRE(a.frames.size() == b.frames.size());
  for (size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(std::memcmp(&a.frames[i].position, &b.frames[i].position, sizeof(Vec3)) == 0);
    CHECK(std::memcmp(&a.frames[i].orientation, &b.frames[i].orientation, sizeof(Quat)) == 0);
  }
}

TEST_CASE("simulate: translation equivariance in free space") {
  SimConfig cfg;
  const Vec3 delta{0.37, -0.81, 0.52};
  for (const TaskKind kind :
       {TaskKind::kDrop, TaskKind::kThrow, TaskKind::kRoll, TaskKind::kDrag,
        TaskKind::kStatic}) {
    TaskSpec task;
    task.kind = kind;
    task.heading = {0.8, 0.6, 0};
    if (kind == TaskKind::kDrag) {
      PathSpec path;
      path.shape = PathShape::kSCurve;
      path.anchor = {0.5, 0.2, 1.0};
      path.heading = {0.8, 0.6, 0};
      task.drag_path = path;
    }
    const BodyState base = sphere_at({0.5, 0.2, 1.0});
    BodyState shifted = base;
    shifted.position += delta;
    const Trajectory x = simulate(base, task, nullptr, cfg);
    const Trajectory y = simulate(shifted, task, nullptr, cfg);
    for (size_t i = 0; i < x.frames.size(); ++i) {
      CHECK(norm(y.frames[i].position - (x.frames[i].position + delta)) <= 1e-9);
    }
  }
}

TEST_CASE("simulate: energy never increases across macroscopic impacts") {
  const MeshAccel floor = floor_accel();
  for (const double e : {0.0, 0.4, 0.9}) {
    SimConfig cfg;
    cfg.restitution = e;
    const double r = 0.1;
    BodyState body = sphere_at({0, 0, r + 1.0}, r);
    const auto energy = [&](const BodyState& b) {
      return 0.5 * norm2(b.linear_velocity) + cfg.gravity * (b.position.z - r);
    };
    double pre_contact_energy = energy(body);
    int bounces = 0;
    for (int n = 0; n < 3 * 240 && bounces < 3; ++n) {
      const double before = energy(body);
      const StepResult s = step(body, &floor, {0, 0, 0}, cfg.dt(), cfg);
      body = s.body;
      if (s.contact) {
        const double after = energy(body);
        CHECK(after <= pre_contact_energy * (1.0 + 1e-6));
        CHECK(after <= before + 1e-6 * std::fabs(before) + 1e-12);
        ++bounces;
        // Skip past the contact; re-arm on the next clean flight stretch.
        pre_contact_energy = after;
      } else {
        pre_contact_energy = std::fmin(pre_contact_energy, energy(body));
      }
      if (norm(body.linear_velocity) < 0.3 && body.position.z < r + 1e-3) break;
    }
    CHECK(bounces >= 1);
  }
}

TEST_CASE("simulate: no tunneling at desk speeds") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const double r = rng.uniform(0.05, 0.15);
    BodyState body = sphere_at({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 2.5)},
                               r);
    const double speed = rng.uniform(0.0, 8.0);
    const double angle = rng.uniform(0.0, 6.283);
    body.linear_velocity = {speed * std::cos(angle), speed * std::sin(angle),
                            rng.uniform(-4.0, 1.0)};
    for (int n = 0; n < 480; ++n) {
      body = step(body, &floor, {0, 0, 0}, cfg.dt(), cfg).body;
      CHECK(clearance(floor.mesh, floor.bvh, body.position, r) >= -1e-3);
    }
  }
}

TEST_CASE("simulate: rolling sets a no-slip angular velocity at contact") {
  const MeshAccel floor = floor_accel();
  SimConfig cfg;
  cfg.friction = 0.0;  // keep the tangential speed constant
  const double r = 0.1;
  TaskSpec task;
  task.kind = TaskKind::kRoll;
  task.heading = {1, 0, 0};
  BodyState body = sphere_at({0, 0, r}, r);
  body.linear_velocity = task.roll_speed * task.heading;
  // March until a contacting substep and inspect the angular velocity.
  for (int n = 0; n < 240; ++n) {
    const StepResult s = step(body, &floor, {0, 0, 0}, cfg.dt(), cfg);
    body = s.body;
    if (s.contact && norm(body.angular_velocity) > 1e-9) {
      const Vec3 expected = cross(Vec3{0, 0, 1}, body.linear_velocity) / r;
      CHECK(norm(body.angular_velocity - expected) <= 1e-6 * std::fmax(1.0, norm(expected)));
      return;
    }
  }
  FAIL("no rolling contact observed");
}

TEST_CASE("SimConfig validates the substep ratio") {
  SimConfig cfg;
  CHECK(cfg.substeps_per_frame() == 15);
  cfg.substep_hz = 250;
  CHECK_THROWS_AS(cfg.substeps_per_frame(), Error);
}

TEST_CASE("simulate: divergence is reported, not propagated as garbage") {
  SimConfig cfg;
  TaskSpec task;
  task.kind = TaskKind::kDrag;
  PathSpec path;
  path.shape = PathShape::kCircle;
  path.anchor = {0, 0, 1};
  path.heading = {1, 0, 0};
  path.radius = 1.0;
  task.drag_path = path;
  task.spring_k = 1e18;  // absurd stiffness blows the integrator up
  task.spring_c = 0.0;
  BodyState body = sphere_at({5, 5, 1});
  CHECK_THROWS_AS(simulate(body, task, nullptr, cfg), SimulationDiverged);
}
