#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_util.hpp"
#include "trajpair/image_io.hpp"
#include "trajpair/metrics.hpp"
#include "trajpair/primitives.hpp"
#include "trajpair/render.hpp"

using namespace trajpair;

namespace {

Scene tiny_scene() { return test_util::make_floor_scene(12.0); }

ObjectPose rest_pose(const Vec3& p) { return {p, Quat{}}; }

Camera down_camera(int w = 160, int h = 90) {
  return make_camera({0, 0, 2.0}, {1.5, 0, 0.2}, {0, 0, 1}, 0.9, w, h);
}

int count_foreground(const MaskFrame& mask) {
  int n = 0;
  for (const uint8_t v : mask.value) n += v == kMaskForeground ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("render_frame: empty scene fills with the background color") {
  // A scene must hold something; park the floor far below the frustum.
  const Scene scene = make_scene(
      {{"floor", transform_mesh(make_box_mesh(1.0), 1.0, Quat{}, {0, 0, -500})}});
  const Camera cam = make_camera({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, 0.9, 64, 36);
  RenderSettings settings;
  const FrameBuffer frame =
      render_frame(scene, make_box_mesh(0.2), rest_pose({0, 0, -500}), cam, settings);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      CHECK(frame.at(x, y)[0] == settings.background[0]);
      CHECK(frame.at(x, y)[1] == settings.background[1]);
      CHECK(frame.at(x, y)[2] == settings.background[2]);
    }
  }
}

TEST_CASE("render_frame: head-on lit plane shades to the exact Lambert value") {
  const Scene scene = tiny_scene();
  RenderSettings settings;
  settings.light_direction = {0, 0, 1};  // floor normal dead-on
  const Camera cam = make_camera({0, 0, 3.0}, {0.4, 0, 0}, {0, 0, 1}, 0.9, 96, 54);
  const FrameBuffer frame =
      render_frame(scene, make_box_mesh(0.05), rest_pose({50, 50, 0}), cam, settings);
  const Vec3 albedo = albedo_for_object(0);
  const double shade = settings.ambient + settings.light_intensity;
  const uint8_t expected_r =
      static_cast<uint8_t>(std::lround(255.0 * std::fmin(1.0, albedo.x * shade)));
  // Every pixel that hits the floor carries the same exact byte.
  int floor_pixels = 0;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (frame.at(x, y)[0] == expected_r) ++floor_pixels;
    }
  }
  CHECK(floor_pixels > frame.width * frame.height / 2);
}

TEST_CASE("render determinism: byte-identical buffers") {
  const Scene scene = tiny_scene();
  const Camera cam = down_camera();
  const TriMesh object = make_sphere_mesh(0.5, 2);
  const ObjectPose pose = rest_pose({1.5, 0, 0.5});
  const RenderSettings settings;
  const FrameBuffer f1 = render_frame(scene, object, pose, cam, settings);
  const FrameBuffer f2 = render_frame(scene, object, pose, cam, settings);
  CHECK(f1.rgb == f2.rgb);
  const MaskFrame m1 = render_mask(scene, object, pose, cam);
  const MaskFrame m2 = render_mask(scene, object, pose, cam);
  CHECK(m1.value == m2.value);
}

TEST_CASE("render_mask: occluded object is empty, masks stay binary") {
  auto objects = test_util::room_objects(8.0, 8.0);
  objects.emplace_back("divider", transform_mesh(make_box_mesh(0.1, 8.0, 2.5), 1.0, Quat{},
                                                 {1.0, 0, 1.25}));
  const Scene scene = make_scene(std::move(objects));
  const Camera cam = make_camera({-3.0, 0, 1.5}, {1.0, 0, 0.6}, {0, 0, 1}, 0.9, 160, 90);
  const TriMesh object = make_sphere_mesh(0.5, 2);
  const MaskFrame hidden = render_mask(scene, object, rest_pose({2.5, 0, 0.8}), cam);
  CHECK(count_foreground(hidden) == 0);
  for (const uint8_t v : hidden.value) {
    CHECK((v == kMaskForeground || v == kMaskBackground));
  }

  const MaskFrame visible = render_mask(scene, object, rest_pose({-0.5, 0, 0.8}), cam);
  CHECK(count_foreground(visible) > 0);
}

TEST_CASE("render_mask: lone sphere area matches the projected disk") {
  const Scene scene = make_scene(
      {{"floor", transform_mesh(make_box_mesh(1.0), 1.0, Quat{}, {0, 0, -500})}});
  const Camera cam = make_camera({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, 0.9, 640, 360);
  const double r = 0.25;
  const double d = 2.5;
  const TriMesh sphere = make_sphere_mesh(r, 3);
  const MaskFrame mask = render_mask(scene, sphere, rest_pose({d, 0, 0}), cam);
  const double focal = cam.focal_px();
  const double expected = 3.14159265358979323846 * (focal * r / d) * (focal * r / d);
  CHECK(std::fabs(count_foreground(mask) - expected) <= 0.05 * expected);
}

TEST_CASE("occlusion monotonicity: an occluder never enlarges the mask") {
  const Scene open_scene = tiny_scene();
  const Camera cam = down_camera(200, 112);
  const TriMesh object = make_sphere_mesh(0.5, 2);
  const ObjectPose pose = rest_pose({2.0, 0, 0.6});
  const int open_count = count_foreground(render_mask(open_scene, object, pose, cam));

  auto objects = test_util::room_objects(12.0, 12.0);
  objects.emplace_back("post", transform_mesh(make_box_mesh(0.15, 0.6, 2.0), 1.0, Quat{},
                                              {1.0, 0, 1.0}));
  const Scene blocked_scene = make_scene(std::move(objects));
  const int blocked_count = count_foreground(render_mask(blocked_scene, object, pose, cam));
  CHECK(blocked_count <= open_count);
  CHECK(open_count > 0);
}

TEST_CASE("mask/RGB consistency via re-cast") {
  const Scene scene = tiny_scene();
  const Camera cam = down_camera();
  const TriMesh object = make_sphere_mesh(0.5, 2);
  const ObjectPose pose = rest_pose({1.6, 0.2, 0.5});
  const MaskFrame mask = render_mask(scene, object, pose, cam);
  const MeshAccel posed = make_accel(transform_mesh(object, 1.0, pose.orientation, pose.position));
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) != kMaskForeground) continue;
      const Ray ray = pixel_ray(cam, x + 0.5, y + 0.5);
      const auto object_hit = ray_cast(posed.mesh, posed.bvh, ray);
      REQUIRE(object_hit.has_value());
      const auto scene_hit = scene_ray_cast(scene, ray);
      if (scene_hit) CHECK(object_hit->t <= scene_hit->t);
    }
  }
}

TEST_CASE("render_video: static trajectory gives identical frames, counts line up") {
  const Scene scene = tiny_scene();
  const Camera cam = down_camera(96, 54);
  const TriMesh object = make_sphere_mesh(0.5, 2);
  SimConfig cfg;
  cfg.frames = 81;
  TaskSpec task;
  task.kind = TaskKind::kStatic;
  BodyState body;
  body.position = {1.6, 0, 0.4};
  body.proxy_radius = 0.4;
  const Trajectory traj = simulate(body, task, &scene.merged, cfg);
  const auto [frames, masks] = render_video(scene, object, traj, cam, RenderSettings{});
  REQUIRE(frames.size() == 81);
  REQUIRE(masks.size() == 81);
  for (size_t i = 1; i < frames.size(); ++i) {
    CHECK(frames[i].rgb == frames[0].rgb);
    CHECK(masks[i].value == masks[0].value);
  }
}

TEST_CASE("render_video: mask foreground stays inside the projected bbox") {
  const Scene scene = tiny_scene();
  const Camera cam = down_camera();
  const TriMesh object = make_sphere_mesh(0.5, 2);
  SimConfig cfg;
  cfg.frames = 17;
  TaskSpec task;
  task.kind = TaskKind::kDrop;
  BodyState body;
  body.position = {1.8, 0, 1.2};
  body.proxy_radius = 0.5;
  const Trajectory traj = simulate(body, task, &scene.merged, cfg);
  const auto [frames, masks] = render_video(scene, object, traj, cam, RenderSettings{});
  for (size_t i = 0; i < masks.size(); ++i) {
    const TriMesh posed =
        transform_mesh(object, 1.0, traj.frames[i].orientation, traj.frames[i].position);
    const auto box = screen_bbox(cam, posed.vertices);
    const auto mask_box = bbox_from_mask(masks[i]);
    if (!mask_box) continue;
    REQUIRE(box.has_value());
    CHECK(mask_box->x_min >= box->x_min - 1);
    CHECK(mask_box->y_min >= box->y_min - 1);
    CHECK(mask_box->x_max <= box->x_max + 1);
    CHECK(mask_box->y_max <= box->y_max + 1);
  }
}

TEST_CASE("image io: exact PPM/PGM bytes and round trips") {
  const auto dir = test_util::fresh_dir("imgio");

  FrameBuffer tiny;
  tiny.width = 2;
  tiny.height = 1;
  tiny.rgb = {0xFF, 0x00, 0x00, 0x00, 0x00, 0x00};
  const auto ppm_path = (dir / "tiny.ppm").string();
  write_frame(tiny, ppm_path);
  {
    std::ifstream in(ppm_path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string expected = std::string("P6\n2 1\n255\n") +
                                 std::string("\xFF\x00\x00\x00\x00\x00", 6);
    CHECK(data == expected);
  }
  const FrameBuffer tiny_back = read_frame(ppm_path);
  CHECK(tiny_back.rgb == tiny.rgb);

  MaskFrame mask;
  mask.width = 3;
  mask.height = 2;
  mask.value = {255, 255, 255, 255, 255, 255};
  const auto pgm_path = (dir / "mask.pgm").string();
  write_mask(mask, pgm_path);
  {
    std::ifstream in(pgm_path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(data.substr(0, 9) == "P5\n3 2\n25");
    for (size_t i = data.size() - 6; i < data.size(); ++i) {
      CHECK(static_cast<uint8_t>(data[i]) == 0xFF);
    }
  }
  const MaskFrame mask_back = read_mask(pgm_path);
  CHECK(mask_back.value == mask.value);

  // Random payload round trip.
  Rng rng(47);
  FrameBuffer noise;
  noise.width = 31;
  noise.height = 17;
  noise.rgb.resize(31 * 17 * 3);
  for (auto& b : noise.rgb) b = static_cast<uint8_t>(rng.uniform_int(256));
  const auto noise_path = (dir / "noise.ppm").string();
  write_frame(noise, noise_path);
  CHECK(read_frame(noise_path).rgb == noise.rgb);

  CHECK_THROWS_AS(read_frame((dir / "missing.ppm").string()), ImageIoError);
  CHECK_THROWS_AS(write_frame(tiny, (dir / "no_dir" / "x.ppm").string()), ImageIoError);
}
