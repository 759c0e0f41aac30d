#pragma once

// End-to-end batch pipeline: procedural scene synthesis, preflight, paired
// placement, optional corridor-based scene modification, dual simulation and
// rendering, output checking, and sharded deterministic runs.
//
// Every output byte is a pure function of (config, seed): per-seed generators
// derive from the seed alone, manifests store relative paths and deterministic
// values only, and JSON objects serialize with sorted keys.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trajpair/camera.hpp"
#include "trajpair/error.hpp"
#include "trajpair/image_io.hpp"
#include "trajpair/metrics.hpp"
#include "trajpair/obj.hpp"
#include "trajpair/physics.hpp"
#include "trajpair/placement.hpp"
#include "trajpair/primitives.hpp"
#include "trajpair/render.hpp"
#include "trajpair/rng.hpp"
#include "trajpair/scene.hpp"
#include "trajpair/scenegen.hpp"
#include "trajpair/scenemod.hpp"

namespace trajpair {

using json = nlohmann::json;

struct TaskWeights {
  double drop = 2867.0;
  double throw_ = 3113.0;
  double roll = 3162.0;
  double drag = 9537.0;
  double static_ = 1564.0;
};

struct RunConfig {
  int frames = 81;
  double fps = 16.0;
  int width = 320;
  int height = 180;
  TaskWeights task_weights;
  double no_hit_probability = 0.5;
  double gravity = 9.81;
  int substep_hz = 240;
  double restitution = 0.4;
  double friction = 0.5;
  PlacementConfig placement;
  SceneSpec scene;
  std::vector<std::string> primitives{"box", "sphere", "cylinder", "cone"};
  std::vector<std::string> obj_paths;
  std::string output_root = "run";
  long seed_lo = 0;
  long seed_hi = 49;
  int workers = 1;
  std::optional<std::vector<std::pair<long, long>>> shards;

  SimConfig sim_config() const {
    SimConfig cfg;
    cfg.gravity = gravity;
    cfg.substep_hz = substep_hz;
    cfg.restitution = restitution;
    cfg.friction = friction;
    cfg.frames = frames;
    cfg.fps = fps;
    return cfg;
  }

  SceneSpec scene_spec() const {
    SceneSpec spec = scene;
    spec.width = width;
    spec.height = height;
    return spec;
  }

  void validate() const {
    if (frames < 1) throw ConfigError("config: frames must be >= 1");
    if (width < 16 || height < 16) throw ConfigError("config: resolution below 16 px");
    if (no_hit_probability < 0.0 || no_hit_probability > 1.0) {
      throw ConfigError("config: no_hit_probability outside [0, 1]");
    }
    const double weights[] = {task_weights.drop, task_weights.throw_, task_weights.roll,
                              task_weights.drag, task_weights.static_};
    double total = 0.0;
    for (const double w : weights) {
      if (w < 0.0) throw ConfigError("config: task weights must be >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw ConfigError("config: at least one task weight must be positive");
    if (seed_hi < seed_lo) throw ConfigError("config: empty seed range");
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
    try {
      sim_config().substeps_per_frame();
    } catch (const Error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
};

namespace detail {

inline void require_known_keys(const json& obj, const std::string& context,
                               std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("config: unknown key '" + key + "' in " + context);
  }
}

inline std::pair<double, double> read_range(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("config: " + context + " must be a [lo, hi] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline RunConfig parse_run_config(const json& root) {
  RunConfig cfg;
  try {
    detail::require_known_keys(
        root, "top level",
        {"frames", "fps", "resolution", "task_weights", "no_hit_probability", "physics",
         "placement", "scene", "objects", "output_root", "seed_range", "workers", "shards"});
    if (root.contains("frames")) cfg.frames = root["frames"].get<int>();
    if (root.contains("fps")) cfg.fps = root["fps"].get<double>();
    if (root.contains("resolution")) {
      const auto [w, h] = detail::read_range(root["resolution"], "resolution");
      cfg.width = static_cast<int>(w);
      cfg.height = static_cast<int>(h);
    }
    if (root.contains("task_weights")) {
      const json& tw = root["task_weights"];
      detail::require_known_keys(tw, "task_weights",
                                 {"drop", "throw", "roll", "drag", "static"});
      if (tw.contains("drop")) cfg.task_weights.drop = tw["drop"].get<double>();
      if (tw.contains("throw")) cfg.task_weights.throw_ = tw["throw"].get<double>();
      if (tw.contains("roll")) cfg.task_weights.roll = tw["roll"].get<double>();
      if (tw.contains("drag")) cfg.task_weights.drag = tw["drag"].get<double>();
      if (tw.contains("static")) cfg.task_weights.static_ = tw["static"].get<double>();
    }
    if (root.contains("no_hit_probability")) {
      cfg.no_hit_probability = root["no_hit_probability"].get<double>();
    }
    if (root.contains("physics")) {
      const json& ph = root["physics"];
      detail::require_known_keys(ph, "physics",
                                 {"gravity", "substep_hz", "restitution", "friction"});
      if (ph.contains("gravity")) cfg.gravity = ph["gravity"].get<double>();
      if (ph.contains("substep_hz")) cfg.substep_hz = ph["substep_hz"].get<int>();
      if (ph.contains("restitution")) cfg.restitution = ph["restitution"].get<double>();
      if (ph.contains("friction")) cfg.friction = ph["friction"].get<double>();
    }
    if (root.contains("placement")) {
      const json& pl = root["placement"];
      detail::require_known_keys(
          pl, "placement",
          {"clearance_margin", "retry_budget", "air_depth_band", "air_depth_fallback",
           "depth_sigma_frac", "support_normal_min_up", "scale_fraction"});
      if (pl.contains("clearance_margin")) {
        cfg.placement.clearance_margin = pl["clearance_margin"].get<double>();
      }
      if (pl.contains("retry_budget")) {
        cfg.placement.retry_budget = pl["retry_budget"].get<int>();
      }
      if (pl.contains("air_depth_band")) {
        std::tie(cfg.placement.air_band_lo, cfg.placement.air_band_hi) =
            detail::read_range(pl["air_depth_band"], "placement.air_depth_band");
      }
      if (pl.contains("air_depth_fallback")) {
        std::tie(cfg.placement.air_fallback_lo, cfg.placement.air_fallback_hi) =
            detail::read_range(pl["air_depth_fallback"], "placement.air_depth_fallback");
      }
      if (pl.contains("depth_sigma_frac")) {
        cfg.placement.depth_sigma_frac = pl["depth_sigma_frac"].get<double>();
      }
      if (pl.contains("support_normal_min_up")) {
        cfg.placement.support_min_up = pl["support_normal_min_up"].get<double>();
      }
      if (pl.contains("scale_fraction")) {
        std::tie(cfg.placement.scale_fraction_lo, cfg.placement.scale_fraction_hi) =
            detail::read_range(pl["scale_fraction"], "placement.scale_fraction");
      }
    }
    if (root.contains("scene")) {
      const json& sc = root["scene"];
      detail::require_known_keys(sc, "scene",
                                 {"room_extent", "wall_height", "walls", "ceiling",
                                  "clutter_count", "clutter_size", "camera_count",
                                  "eye_height", "vertical_fov_deg"});
      if (sc.contains("room_extent")) {
        std::tie(cfg.scene.room_extent_lo, cfg.scene.room_extent_hi) =
            detail::read_range(sc["room_extent"], "scene.room_extent");
      }
      if (sc.contains("wall_height")) cfg.scene.wall_height = sc["wall_height"].get<double>();
      if (sc.contains("walls")) cfg.scene.walls = sc["walls"].get<bool>();
      if (sc.contains("ceiling")) cfg.scene.ceiling = sc["ceiling"].get<bool>();
      if (sc.contains("clutter_count")) {
        const auto [lo, hi] = detail::read_range(sc["clutter_count"], "scene.clutter_count");
        cfg.scene.clutter_lo = static_cast<int>(lo);
        cfg.scene.clutter_hi = static_cast<int>(hi);
      }
      if (sc.contains("clutter_size")) {
        std::tie(cfg.scene.clutter_size_lo, cfg.scene.clutter_size_hi) =
            detail::read_range(sc["clutter_size"], "scene.clutter_size");
      }
      if (sc.contains("camera_count")) {
        const auto [lo, hi] = detail::read_range(sc["camera_count"], "scene.camera_count");
        cfg.scene.camera_lo = static_cast<int>(lo);
        cfg.scene.camera_hi = static_cast<int>(hi);
      }
      if (sc.contains("eye_height")) {
        std::tie(cfg.scene.eye_height_lo, cfg.scene.eye_height_hi) =
            detail::read_range(sc["eye_height"], "scene.eye_height");
      }
      if (sc.contains("vertical_fov_deg")) {
        cfg.scene.vertical_fov =
            sc["vertical_fov_deg"].get<double>() * 3.14159265358979323846 / 180.0;
      }
    }
    if (root.contains("objects")) {
      const json& ob = root["objects"];
      detail::require_known_keys(ob, "objects", {"primitives", "obj_paths"});
      if (ob.contains("primitives")) {
        cfg.primitives = ob["primitives"].get<std::vector<std::string>>();
      }
      if (ob.contains("obj_paths")) {
        cfg.obj_paths = ob["obj_paths"].get<std::vector<std::string>>();
      }
    }
    if (root.contains("output_root")) cfg.output_root = root["output_root"].get<std::string>();
    if (root.contains("seed_range")) {
      const auto [lo, hi] = detail::read_range(root["seed_range"], "seed_range");
      cfg.seed_lo = static_cast<long>(lo);
      cfg.seed_hi = static_cast<long>(hi);
    }
    if (root.contains("workers")) cfg.workers = root["workers"].get<int>();
    if (root.contains("shards") && !root["shards"].is_null()) {
      std::vector<std::pair<long, long>> shards;
      for (const json& entry : root["shards"]) {
        const auto [lo, hi] = detail::read_range(entry, "shards entry");
        shards.emplace_back(static_cast<long>(lo), static_cast<long>(hi));
      }
      cfg.shards = std::move(shards);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error in ") + path + ": " + e.what());
  }
  return parse_run_config(root);
}

inline json run_config_to_json(const RunConfig& cfg) {
  json root;
  root["frames"] = cfg.frames;
  root["fps"] = cfg.fps;
  root["resolution"] = {cfg.width, cfg.height};
  root["task_weights"] = {{"drop", cfg.task_weights.drop},
                          {"throw", cfg.task_weights.throw_},
                          {"roll", cfg.task_weights.roll},
                          {"drag", cfg.task_weights.drag},
                          {"static", cfg.task_weights.static_}};
  root["no_hit_probability"] = cfg.no_hit_probability;
  root["physics"] = {{"gravity", cfg.gravity},
                     {"substep_hz", cfg.substep_hz},
                     {"restitution", cfg.restitution},
                     {"friction", cfg.friction}};
  root["placement"] = {{"clearance_margin", cfg.placement.clearance_margin},
                       {"retry_budget", cfg.placement.retry_budget},
                       {"air_depth_band", {cfg.placement.air_band_lo, cfg.placement.air_band_hi}},
                       {"air_depth_fallback",
                        {cfg.placement.air_fallback_lo, cfg.placement.air_fallback_hi}},
                       {"depth_sigma_frac", cfg.placement.depth_sigma_frac},
                       {"support_normal_min_up", cfg.placement.support_min_up},
                       {"scale_fraction",
                        {cfg.placement.scale_fraction_lo, cfg.placement.scale_fraction_hi}}};
  root["scene"] = {{"room_extent", {cfg.scene.room_extent_lo, cfg.scene.room_extent_hi}},
                   {"wall_height", cfg.scene.wall_height},
                   {"walls", cfg.scene.walls},
                   {"ceiling", cfg.scene.ceiling},
                   {"clutter_count", {cfg.scene.clutter_lo, cfg.scene.clutter_hi}},
                   {"clutter_size", {cfg.scene.clutter_size_lo, cfg.scene.clutter_size_hi}},
                   {"camera_count", {cfg.scene.camera_lo, cfg.scene.camera_hi}},
                   {"eye_height", {cfg.scene.eye_height_lo, cfg.scene.eye_height_hi}},
                   {"vertical_fov_deg", cfg.scene.vertical_fov * 180.0 / 3.14159265358979323846}};
  root["objects"] = {{"primitives", cfg.primitives}, {"obj_paths", cfg.obj_paths}};
  root["output_root"] = cfg.output_root;
  root["seed_range"] = {cfg.seed_lo, cfg.seed_hi};
  root["workers"] = cfg.workers;
  if (cfg.shards) {
    json shards = json::array();
    for (const auto& [lo, hi] : *cfg.shards) shards.push_back({lo, hi});
    root["shards"] = shards;
  } else {
    root["shards"] = nullptr;
  }
  return root;
}

inline std::string config_hash(const RunConfig& cfg) {
  const std::string dump = run_config_to_json(cfg).dump();
  uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : dump) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ObjectSpec {
  std::string name;
  TriMesh mesh;  // centered on its AABB center
};

inline std::vector<ObjectSpec> build_object_pool(const RunConfig& cfg) {
  std::vector<ObjectSpec> pool;
  for (const std::string& name : cfg.primitives) {
    if (name == "box") {
      pool.push_back({"box", make_box_mesh(1.0)});
    } else if (name == "sphere") {
      pool.push_back({"sphere", make_sphere_mesh(0.5, 2)});
    } else if (name == "cylinder") {
      pool.push_back({"cylinder", make_cylinder_mesh(0.35, 1.0)});
    } else if (name == "cone") {
      pool.push_back({"cone", make_cone_mesh(0.4, 1.0)});
    } else {
      throw ConfigError("config: unknown primitive '" + name + "'");
    }
  }
  for (const std::string& path : cfg.obj_paths) {
    TriMesh mesh = load_obj(path);
    const Vec3 center = mesh_aabb(mesh).center();
    mesh = transform_mesh(mesh, 1.0, Quat{}, -center);
    pool.push_back({std::filesystem::path(path).stem().string(), std::move(mesh)});
  }
  if (pool.empty()) throw ConfigError("config: empty object pool");
  return pool;
}

struct PreflightResult {
  bool pass = true;
  std::string reason;
};

// Render-free camera/scene suitability check over a coarse 16x9 ray grid.
inline PreflightResult preflight(const Scene& scene, const Camera& cam, TaskKind task) {
  constexpr int kGridX = 16;
  constexpr int kGridY = 9;
  int hits = 0;
  int upward = 0;
  for (int j = 0; j < kGridY; ++j) {
    for (int i = 0; i < kGridX; ++i) {
      const double px = (i + 0.5) * cam.width / kGridX;
      const double py = (j + 0.5) * cam.height / kGridY;
      const auto hit = scene_ray_cast(scene, pixel_ray(cam, px, py));
      if (!hit) continue;
      ++hits;
      if (dot(hit->face_normal, Vec3{0, 0, 1}) >= 0.95) ++upward;
    }
  }
  const int total = kGridX * kGridY;
  if (hits < 0.30 * total) return {false, "insufficient geometry coverage"};
  if (placement_mode_for(task) == PlacementMode::kGround && upward < 0.05 * hits) {
    return {false, "no support surface"};
  }
  return {true, ""};
}

struct CheckResult {
  bool pass = true;
  std::string reason;
};

inline CheckResult canonical_output_check(const std::vector<FrameBuffer>& frames_a,
                                          const MaskVideo& masks_a,
                                          const std::vector<FrameBuffer>& frames_b,
                                          const MaskVideo& masks_b, const RunConfig& cfg) {
  const size_t n = static_cast<size_t>(cfg.frames);
  if (frames_a.size() != n || masks_a.size() != n || frames_b.size() != n ||
      masks_b.size() != n) {
    return {false, "frame count"};
  }
  for (const auto& f : frames_a) {
    if (f.width != cfg.width || f.height != cfg.height) return {false, "resolution"};
  }
  for (const auto& f : frames_b) {
    if (f.width != cfg.width || f.height != cfg.height) return {false, "resolution"};
  }
  for (const auto* masks : {&masks_a, &masks_b}) {
    for (const MaskFrame& m : *masks) {
      if (m.width != cfg.width || m.height != cfg.height) return {false, "resolution"};
      for (const uint8_t v : m.value) {
        if (v != kMaskForeground && v != kMaskBackground) return {false, "mask not binary"};
      }
    }
  }
  for (const auto* mask0 : {&masks_a.front(), &masks_b.front()}) {
    bool any = false;
    for (const uint8_t v : mask0->value) {
      if (v == kMaskForeground) {
        any = true;
        break;
      }
    }
    if (!any) return {false, "object not visible at start"};
  }
  return {true, ""};
}

struct PairOutcome {
  long seed = 0;
  bool success = false;
  std::string rejection_reason;  // empty on success
  std::string task;
  bool no_hit = false;
  std::string dir;  // relative to the run root, set on success
};

namespace detail {

inline json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline json placement_json(const Placement& p) {
  json j;
  j["position"] = vec_json(p.position);
  j["mode"] = p.mode == PlacementMode::kAir ? "air" : "ground";
  j["pixel"] = {p.px, p.py};
  j["depth"] = p.depth;
  if (p.support_normal) {
    j["support_normal"] = vec_json(*p.support_normal);
    j["support_object_id"] = p.support_object_id;
  } else {
    j["support_normal"] = nullptr;
  }
  return j;
}

inline std::string frame_name(const char* prefix, const char* ext, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05d.%s", prefix, index, ext);
  return buf;
}

inline TaskKind draw_task_kind(Rng& rng, const TaskWeights& w) {
  const double total = w.drop + w.throw_ + w.roll + w.drag + w.static_;
  const double r = rng.uniform() * total;
  double acc = w.drop;
  if (r < acc) return TaskKind::kDrop;
  acc += w.throw_;
  if (r < acc) return TaskKind::kThrow;
  acc += w.roll;
  if (r < acc) return TaskKind::kRoll;
  acc += w.drag;
  if (r < acc) return TaskKind::kDrag;
  return TaskKind::kStatic;
}

inline PathSpec draw_drag_path(Rng& rng, const Vec3& heading) {
  PathSpec path;
  path.heading = heading;
  const int shape = rng.uniform_int(3);
  if (shape == 0) {
    path.shape = PathShape::kCircle;
    path.radius = rng.uniform(0.3, 0.8);
  } else if (shape == 1) {
    path.shape = PathShape::kSCurve;
    path.length = rng.uniform(0.8, 2.0);
    path.amplitude = rng.uniform(0.15, 0.4);
  } else {
    path.shape = PathShape::kSpiral;
    path.spiral_a = rng.uniform(0.05, 0.15);
    path.turns = rng.uniform(1.5, 2.5);
    const double final_radius = rng.uniform(0.3, 0.7);
    path.spiral_b = (final_radius - path.spiral_a) / (6.283185307179586 * path.turns);
  }
  return path;
}

}  // namespace detail

// Generates one paired sample under `pair_dir`. Deterministic per (cfg, seed);
// failures return an outcome with the rejection reason and leave no files.
inline PairOutcome generate_pair(long seed, const RunConfig& cfg,
                                 const std::vector<ObjectSpec>& pool,
                                 const std::filesystem::path& pair_dir) {
  namespace fs = std::filesystem;
  PairOutcome outcome;
  outcome.seed = seed;

  Rng rng(static_cast<uint64_t>(seed));
  const GeneratedScene generated = generate_procedural_scene(rng, cfg.scene_spec());
  const Camera cam = generated.cameras[rng.uniform_int(
      static_cast<int>(generated.cameras.size()))];
  const int object_index = rng.uniform_int(static_cast<int>(pool.size()));
  const ObjectSpec& object = pool[object_index];

  TaskSpec task;
  task.kind = detail::draw_task_kind(rng, cfg.task_weights);
  outcome.task = task_kind_name(task.kind);
  try {
    task.heading = horizontal_unit(cam.forward);
  } catch (const Error&) {
    task.heading = {1, 0, 0};
  }
  if (task.kind == TaskKind::kDrag) {
    task.drag_path = detail::draw_drag_path(rng, task.heading);
  }

  const PreflightResult pf = preflight(generated.scene, cam, task.kind);
  if (!pf.pass) {
    outcome.rejection_reason = "preflight: " + pf.reason;
    return outcome;
  }

  PlacementPair pair;
  try {
    pair = sample_pair(rng, generated.scene, cam, task, object.mesh, cfg.placement);
  } catch (const PlacementError& e) {
    outcome.rejection_reason = std::string("placement: ") + e.what();
    return outcome;
  }
  if (task.drag_path) task.drag_path->anchor = pair.source.position;

  const double radius = proxy_radius_for(object.mesh, pair.scale);
  const TriMesh scaled_mesh = transform_mesh(object.mesh, pair.scale, Quat{}, {0, 0, 0});

  const bool no_hit = rng.uniform() < cfg.no_hit_probability;
  outcome.no_hit = no_hit;
  const SimConfig sim_cfg = cfg.sim_config();

  Scene modified;
  const Scene* sim_scene = &generated.scene;
  if (no_hit) {
    const Corridor corridor = nominal_corridor(task, pair, radius, generated.scene, sim_cfg);
    modified = filter_scene(generated.scene, corridor);
    sim_scene = &modified;
  }

  Trajectory traj_a, traj_b;
  try {
    BodyState body;
    body.proxy_radius = radius;
    body.position = pair.source.position;
    traj_a = simulate(body, task, &sim_scene->merged, sim_cfg, pair.source.support_normal);
    body.position = pair.target.position;
    traj_b = simulate(body, task, &sim_scene->merged, sim_cfg, pair.target.support_normal);
  } catch (const Error& e) {
    outcome.rejection_reason = std::string("simulation: ") + e.what();
    return outcome;
  }

  const RenderSettings settings;
  auto [frames_a, masks_a] = render_video(*sim_scene, scaled_mesh, traj_a, cam, settings);
  auto [frames_b, masks_b] = render_video(*sim_scene, scaled_mesh, traj_b, cam, settings);

  const CheckResult check = canonical_output_check(frames_a, masks_a, frames_b, masks_b, cfg);
  if (!check.pass) {
    outcome.rejection_reason = "canonical: " + check.reason;
    return outcome;
  }

  try {
    fs::create_directories(pair_dir / "A");
    fs::create_directories(pair_dir / "B");
    for (int i = 0; i < cfg.frames; ++i) {
      write_frame(frames_a[i], (pair_dir / "A" / detail::frame_name("frame", "ppm", i)).string());
      write_mask(masks_a[i], (pair_dir / "A" / detail::frame_name("mask", "pgm", i)).string());
      write_frame(frames_b[i], (pair_dir / "B" / detail::frame_name("frame", "ppm", i)).string());
      write_mask(masks_b[i], (pair_dir / "B" / detail::frame_name("mask", "pgm", i)).string());
    }

    json manifest;
    manifest["seed"] = seed;
    manifest["config_hash"] = config_hash(cfg);
    json scene_json;
    scene_json["room"] = {generated.room_width, generated.room_depth};
    json names = json::array();
    for (const SceneObject& obj : generated.scene.objects) names.push_back(obj.name);
    scene_json["objects"] = names;
    scene_json["warnings"] = generated.warnings;
    if (no_hit) {
      json kept = json::array();
      for (const SceneObject& obj : sim_scene->objects) kept.push_back(obj.name);
      scene_json["objects_after_filter"] = kept;
    }
    manifest["scene"] = scene_json;
    manifest["camera"] = {{"position", detail::vec_json(cam.position)},
                          {"forward", detail::vec_json(cam.forward)},
                          {"up", detail::vec_json(cam.up)},
                          {"vertical_fov", cam.vertical_fov},
                          {"resolution", {cam.width, cam.height}}};
    manifest["object"] = {{"name", object.name},
                          {"scale", pair.scale},
                          {"proxy_radius", radius}};
    json task_json;
    task_json["kind"] = outcome.task;
    task_json["heading"] = detail::vec_json(task.heading);
    task_json["throw_speed"] = task.throw_speed;
    task_json["roll_speed"] = task.roll_speed;
    task_json["spring_k"] = task.spring_k;
    task_json["spring_c"] = task.spring_c;
    if (task.drag_path) {
      const PathSpec& p = *task.drag_path;
      task_json["drag_path"] = {
          {"shape", p.shape == PathShape::kCircle
                        ? "circle"
                        : (p.shape == PathShape::kSCurve ? "s_curve" : "spiral")},
          {"anchor", detail::vec_json(p.anchor)},
          {"heading", detail::vec_json(p.heading)},
          {"radius", p.radius},
          {"length", p.length},
          {"amplitude", p.amplitude},
          {"spiral_a", p.spiral_a},
          {"spiral_b", p.spiral_b},
          {"turns", p.turns}};
    } else {
      task_json["drag_path"] = nullptr;
    }
    manifest["task"] = task_json;
    manifest["placement"] = {{"source", detail::placement_json(pair.source)},
                             {"target", detail::placement_json(pair.target)},
                             {"delta", detail::vec_json(pair.delta)}};
    manifest["hit"] = !no_hit;
    manifest["sequences"] = {{"frames_a", "A/frame_%05d.ppm"},
                             {"masks_a", "A/mask_%05d.pgm"},
                             {"frames_b", "B/frame_%05d.ppm"},
                             {"masks_b", "B/mask_%05d.pgm"},
                             {"count", cfg.frames}};
    manifest["timing"] = {{"fps", cfg.fps},
                          {"frames", cfg.frames},
                          {"duration_s", cfg.frames / cfg.fps}};

    std::ofstream out(pair_dir / "pair.manifest");
    if (!out) throw ImageIoError("cannot write pair manifest");
    out << manifest.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::remove_all(pair_dir, ec);
    outcome.rejection_reason = std::string("io: ") + e.what();
    return outcome;
  }

  outcome.success = true;
  return outcome;
}

struct InspectReport {
  long seed = 0;
  std::string task;
  Vec3 delta;
  bool hit = true;
  int frames = 0;
  std::array<int, 4> found_counts{0, 0, 0, 0};  // frames A, masks A, frames B, masks B
  CheckResult check;
};

// File-level variant of the canonical output check, driven by pair.manifest.
inline InspectReport inspect_pair_dir(const std::filesystem::path& pair_dir) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = pair_dir / "pair.manifest";
  std::ifstream in(manifest_path);
  if (!in) throw Error("inspect: missing manifest " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error("inspect: bad manifest: " + std::string(e.what()));
  }

  InspectReport report;
  report.seed = manifest.at("seed").get<long>();
  report.task = manifest.at("task").at("kind").get<std::string>();
  const auto delta = manifest.at("placement").at("delta");
  report.delta = {delta[0].get<double>(), delta[1].get<double>(), delta[2].get<double>()};
  report.hit = manifest.at("hit").get<bool>();
  report.frames = manifest.at("sequences").at("count").get<int>();
  const int width = manifest.at("camera").at("resolution")[0].get<int>();
  const int height = manifest.at("camera").at("resolution")[1].get<int>();
  if (report.frames <= 0) {
    report.check = {false, "frame count"};
    return report;
  }

  const std::array<const char*, 2> dirs = {"A", "B"};
  std::vector<std::vector<MaskFrame>> masks(2);
  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < report.frames; ++i) {
      const fs::path frame_path = pair_dir / dirs[d] / detail::frame_name("frame", "ppm", i);
      const fs::path mask_path = pair_dir / dirs[d] / detail::frame_name("mask", "pgm", i);
      if (fs::exists(frame_path)) {
        const FrameBuffer f = read_frame(frame_path.string());
        if (f.width != width || f.height != height) {
          report.check = {false, "resolution"};
          return report;
        }
        ++report.found_counts[2 * d];
      }
      if (fs::exists(mask_path)) {
        masks[d].push_back(read_mask(mask_path.string()));
        ++report.found_counts[2 * d + 1];
      }
    }
  }
  for (int d = 0; d < 2; ++d) {
    if (report.found_counts[2 * d] != report.frames ||
        report.found_counts[2 * d + 1] != report.frames) {
      report.check = {false, "frame count"};
      return report;
    }
  }
  for (int d = 0; d < 2; ++d) {
    for (const MaskFrame& m : masks[d]) {
      if (m.width != width || m.height != height) {
        report.check = {false, "resolution"};
        return report;
      }
      for (const uint8_t v : m.value) {
        if (v != kMaskForeground && v != kMaskBackground) {
          report.check = {false, "mask not binary"};
          return report;
        }
      }
    }
    bool any = false;
    for (const uint8_t v : masks[d].front().value) {
      if (v == kMaskForeground) {
        any = true;
        break;
      }
    }
    if (!any) {
      report.check = {false, "object not visible at start"};
      return report;
    }
  }
  report.check = {true, ""};
  return report;
}

struct ShardResult {
  int worker_id = 0;
  std::vector<PairOutcome> outcomes;
};

inline json outcome_json(const PairOutcome& o) {
  json j;
  j["seed"] = o.seed;
  j["success"] = o.success;
  j["task"] = o.task;
  j["no_hit"] = o.no_hit;
  if (o.success) {
    j["dir"] = o.dir;
    j["rejection"] = nullptr;
  } else {
    j["rejection"] = o.rejection_reason;
  }
  return j;
}

// Processes one worker's seeds; per-seed failures are recorded, never fatal.
inline ShardResult run_shard(const RunConfig& cfg, const std::vector<long>& seeds,
                             int worker_id, const std::filesystem::path& run_root) {
  namespace fs = std::filesystem;
  const std::vector<ObjectSpec> pool = build_object_pool(cfg);
  const std::string shard_name = "shard_" + std::to_string(worker_id);
  fs::create_directories(run_root / shard_name);

  ShardResult result;
  result.worker_id = worker_id;
  for (const long seed : seeds) {
    const std::string pair_name = "pair_" + std::to_string(seed);
    const fs::path pair_dir = run_root / shard_name / pair_name;
    PairOutcome outcome;
    try {
      outcome = generate_pair(seed, cfg, pool, pair_dir);
    } catch (const std::exception& e) {
      outcome.seed = seed;
      outcome.success = false;
      outcome.rejection_reason = std::string("internal: ") + e.what();
      std::error_code ec;
      fs::remove_all(pair_dir, ec);
    }
    if (outcome.success) outcome.dir = shard_name + "/" + pair_name;
    result.outcomes.push_back(outcome);
  }

  json manifest;
  manifest["worker_id"] = worker_id;
  manifest["seeds"] = seeds;
  json pairs = json::array();
  int successes = 0;
  for (const PairOutcome& o : result.outcomes) {
    pairs.push_back(outcome_json(o));
    if (o.success) ++successes;
  }
  manifest["pairs"] = pairs;
  manifest["successes"] = successes;
  manifest["rejections"] = static_cast<int>(result.outcomes.size()) - successes;
  std::ofstream out(run_root / shard_name / "manifest.json");
  if (!out) throw Error("run_shard: cannot write shard manifest");
  out << manifest.dump(2) << "\n";
  return result;
}

struct RunSummary {
  int pairs_written = 0;
  int rejections = 0;
  std::map<std::string, int> rejections_by_reason;
  std::vector<PairOutcome> outcomes;  // sorted by seed
  std::filesystem::path manifest_path;
};

// Splits the configured seed range into per-worker shards (explicit shards
// from the config when given), runs them on threads, and merges the manifest.
inline RunSummary run_generate(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  cfg.validate();

  std::vector<std::pair<long, long>> ranges;
  if (cfg.shards) {
    ranges = *cfg.shards;
    std::vector<std::pair<long, long>> sorted = ranges;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [lo, hi] : sorted) {
      if (hi < lo) throw ConfigError("config: shard range with hi < lo");
    }
    for (size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i].first <= sorted[i - 1].second) {
        throw ConfigError("config: shard seed ranges overlap: disjointness violated");
      }
    }
  } else {
    const long total = cfg.seed_hi - cfg.seed_lo + 1;
    const long per = (total + cfg.workers - 1) / cfg.workers;
    for (long lo = cfg.seed_lo; lo <= cfg.seed_hi; lo += per) {
      ranges.emplace_back(lo, std::min(cfg.seed_hi, lo + per - 1));
    }
  }

  const fs::path run_root(cfg.output_root);
  fs::create_directories(run_root);

  std::vector<ShardResult> results(ranges.size());
  std::vector<std::string> errors(ranges.size());
  std::vector<std::thread> threads;
  threads.reserve(ranges.size());
  for (size_t w = 0; w < ranges.size(); ++w) {
    threads.emplace_back([&, w]() {
      try {
        std::vector<long> seeds;
        for (long s = ranges[w].first; s <= ranges[w].second; ++s) seeds.push_back(s);
        results[w] = run_shard(cfg, seeds, static_cast<int>(w), run_root);
      } catch (const std::exception& e) {
        errors[w] = e.what();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::string& err : errors) {
    if (!err.empty()) throw Error("run_generate: shard failed: " + err);
  }

  RunSummary summary;
  for (const ShardResult& shard : results) {
    for (const PairOutcome& o : shard.outcomes) summary.outcomes.push_back(o);
  }
  std::sort(summary.outcomes.begin(), summary.outcomes.end(),
            [](const PairOutcome& a, const PairOutcome& b) { return a.seed < b.seed; });

  json manifest;
  manifest["config"] = run_config_to_json(cfg);
  manifest["config_hash"] = config_hash(cfg);
  json shards = json::array();
  for (size_t w = 0; w < results.size(); ++w) {
    int successes = 0;
    for (const PairOutcome& o : results[w].outcomes) successes += o.success ? 1 : 0;
    shards.push_back({{"worker_id", static_cast<int>(w)},
                      {"seed_range", {ranges[w].first, ranges[w].second}},
                      {"successes", successes},
                      {"rejections", static_cast<int>(results[w].outcomes.size()) - successes}});
  }
  manifest["shards"] = shards;
  json pairs = json::array();
  for (const PairOutcome& o : summary.outcomes) {
    pairs.push_back(outcome_json(o));
    if (o.success) {
      ++summary.pairs_written;
    } else {
      ++summary.rejections;
      ++summary.rejections_by_reason[o.rejection_reason];
    }
  }
  manifest["pairs"] = pairs;
  manifest["successes"] = summary.pairs_written;
  json by_reason = json::object();
  for (const auto& [reason, count] : summary.rejections_by_reason) by_reason[reason] = count;
  manifest["rejections_by_reason"] = by_reason;

  summary.manifest_path = run_root / "manifest.json";
  std::ofstream out(summary.manifest_path);
  if (!out) throw Error("run_generate: cannot write run manifest");
  out << manifest.dump(2) << "\n";
  return summary;
}

}  // namespace trajpair
