/**
 * @file scene_io.hpp
 * @brief TOML readers and writers for the object library, scene files and
 * the shared gripper / noise / camera / physics blocks.
 *
 * Object library:
 * @code
 * [[object]]
 * id = "block"
 * mass = 0.2
 * friction_mu = 0.5
 * [[object.tier]]
 * height = 0.05
 * rect = [0.05, 0.10]        # or: radius = 0.03 (segments = 48), or: vertices = [[x, y], ...]
 * center = [0.0, 0.0]
 * @endcode
 *
 * Scene:
 * @code
 * library = "objects.toml"   # optional, relative to this file; built-in library otherwise
 * workspace_size = 0.6
 * [[placement]]
 * object = "block"
 * x = 0.0
 * y = 0.1
 * yaw_deg = 30
 * [noise]
 * sigma = 0.002
 * dropout = 0.0
 * seed = 7
 * [camera]
 * camera_height = 0.8
 * @endcode
 */
#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "graspbench/error.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/perception.hpp"
#include "graspbench/scene.hpp"
#include "graspbench/toml_util.hpp"

namespace graspbench {

inline constexpr double kDegree = std::numbers::pi / 180.0;

inline GripperModel parse_gripper(const toml::table& t, std::string_view path, GripperModel g = {}) {
  cfg::reject_unknown(t, path, {"max_opening", "min_opening", "finger_width", "finger_thickness", "engagement_depth",
                                "fingertip_clearance"});
  g.max_opening = cfg::get_double(t, path, "max_opening", g.max_opening);
  g.min_opening = cfg::get_double(t, path, "min_opening", g.min_opening);
  g.finger_width = cfg::get_double(t, path, "finger_width", g.finger_width);
  g.finger_thickness = cfg::get_double(t, path, "finger_thickness", g.finger_thickness);
  g.engagement_depth = cfg::get_double(t, path, "engagement_depth", g.engagement_depth);
  g.fingertip_clearance = cfg::get_double(t, path, "fingertip_clearance", g.fingertip_clearance);
  try {
    g.validate();
  } catch (const Error& e) {
    cfg::fail(path, e.what());
  }
  return g;
}

inline NoiseModel parse_noise(const toml::table& t, std::string_view path, NoiseModel n = {}) {
  cfg::reject_unknown(t, path, {"sigma", "dropout", "seed"});
  n.gaussian_sigma = cfg::get_double(t, path, "sigma", n.gaussian_sigma);
  n.dropout_probability = cfg::get_double(t, path, "dropout", n.dropout_probability);
  if (auto s = cfg::opt_int(t, path, "seed")) n.seed = static_cast<std::uint64_t>(*s);
  try {
    n.validate();
  } catch (const Error& e) {
    cfg::fail(path, e.what());
  }
  return n;
}

inline void parse_camera(const toml::table& t, std::string_view path, CameraIntrinsics& k, CameraPose& pose) {
  cfg::reject_unknown(t, path, {"fx", "fy", "cx", "cy", "width", "height", "camera_height", "planar_offset", "yaw_deg"});
  k.fx = cfg::get_double(t, path, "fx", k.fx);
  k.fy = cfg::get_double(t, path, "fy", k.fy);
  if (auto w = cfg::opt_int(t, path, "width")) k.width = static_cast<int>(*w);
  if (auto h = cfg::opt_int(t, path, "height")) k.height = static_cast<int>(*h);
  k.cx = cfg::get_double(t, path, "cx", (k.width - 1) / 2.0);
  k.cy = cfg::get_double(t, path, "cy", (k.height - 1) / 2.0);
  pose.height_above_table = cfg::get_double(t, path, "camera_height", pose.height_above_table);
  pose.planar_offset = cfg::opt_point(t, path, "planar_offset").value_or(pose.planar_offset);
  if (auto y = cfg::opt_double(t, path, "yaw_deg")) pose.yaw = *y * kDegree;
  try {
    k.validate();
    pose.validate();
  } catch (const Error& e) {
    cfg::fail(path, e.what());
  }
}

inline PhysicsParams parse_physics(const toml::table& t, std::string_view path, PhysicsParams p = {}) {
  cfg::reject_unknown(t, path, {"grip_force", "gravity", "shake_multiplier", "width_tolerance", "yaw_angle_deg",
                                "collision_sample_step"});
  p.grip_force = cfg::get_double(t, path, "grip_force", p.grip_force);
  p.gravity = cfg::get_double(t, path, "gravity", p.gravity);
  p.shake_multiplier = cfg::get_double(t, path, "shake_multiplier", p.shake_multiplier);
  p.width_tolerance = cfg::get_double(t, path, "width_tolerance", p.width_tolerance);
  if (auto a = cfg::opt_double(t, path, "yaw_angle_deg")) p.yaw_angle = *a * kDegree;
  p.collision_sample_step = cfg::get_double(t, path, "collision_sample_step", p.collision_sample_step);
  if (!(p.grip_force > 0.0)) cfg::fail(cfg::join(path, "grip_force"), "must be positive");
  if (!(p.gravity > 0.0)) cfg::fail(cfg::join(path, "gravity"), "must be positive");
  if (!(p.shake_multiplier > 0.0)) cfg::fail(cfg::join(path, "shake_multiplier"), "must be positive");
  if (!(p.width_tolerance >= 0.0)) cfg::fail(cfg::join(path, "width_tolerance"), "must be >= 0");
  if (!(p.collision_sample_step > 0.0)) cfg::fail(cfg::join(path, "collision_sample_step"), "must be positive");
  return p;
}

inline Tier parse_tier(const toml::table& t, std::string_view path) {
  cfg::reject_unknown(t, path, {"height", "vertices", "rect", "radius", "segments", "center"});
  const double height = cfg::req_double(t, path, "height");
  const Point2 c = cfg::opt_point(t, path, "center").value_or(Point2{});
  const int shapes = (t.contains("vertices") ? 1 : 0) + (t.contains("rect") ? 1 : 0) + (t.contains("radius") ? 1 : 0);
  if (shapes != 1) cfg::fail(path, "give exactly one of vertices, rect or radius");
  try {
    if (t.contains("rect")) {
      const Point2 size = *cfg::opt_point(t, path, "rect");
      return {rect_footprint(size.x, size.y, c.x, c.y), height};
    }
    if (t.contains("radius")) {
      const auto seg = cfg::opt_int(t, path, "segments").value_or(48);
      if (seg < 3) cfg::fail(cfg::join(path, "segments"), "must be at least 3");
      return {disk_footprint(cfg::req_double(t, path, "radius"), static_cast<int>(seg), c.x, c.y), height};
    }
    auto pts = cfg::req_point_list(t, path, "vertices");
    for (auto& p : pts) p = p + Vec2{c.x, c.y};
    if (pts.size() >= 3 && detail::signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());
    return {Polygon(std::move(pts)), height};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    cfg::fail(path, e.what());
  }
}

inline std::vector<ObjectModel> parse_object_library(const toml::table& root, std::string_view path = "") {
  cfg::reject_unknown(root, path, {"object"});
  std::vector<ObjectModel> lib;
  const auto objects = cfg::table_array(root, path, "object");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& t = *objects[i];
    const std::string p = cfg::index_path(cfg::join(path, "object"), i);
    cfg::reject_unknown(t, p, {"id", "mass", "friction_mu", "tier"});
    ObjectModel m;
    m.id = cfg::req_string(t, p, "id");
    m.mass = cfg::req_double(t, p, "mass");
    m.friction_mu = cfg::req_double(t, p, "friction_mu");
    const auto tiers = cfg::table_array(t, p, "tier");
    for (std::size_t k = 0; k < tiers.size(); ++k) m.tiers.push_back(parse_tier(*tiers[k], cfg::index_path(p + ".tier", k)));
    try {
      m.validate();
    } catch (const Error& e) {
      cfg::fail(p, e.what());
    }
    for (const auto& other : lib) {
      if (other.id == m.id) cfg::fail(cfg::join(p, "id"), "duplicate object id '" + m.id + "'");
    }
    lib.push_back(std::move(m));
  }
  if (lib.empty()) cfg::fail(cfg::join(path, "object"), "library defines no objects");
  return lib;
}

inline std::vector<ObjectModel> load_object_library(const std::filesystem::path& file) {
  return parse_object_library(cfg::parse_file(file));
}

/// Library as TOML with explicit vertex lists; parse_object_library reads it back exactly.
inline std::string object_library_to_toml(const std::vector<ObjectModel>& lib) {
  toml::array objects;
  for (const auto& m : lib) {
    toml::array tiers;
    for (const auto& tier : m.tiers) {
      toml::array verts;
      for (const auto& v : tier.footprint.vertices()) verts.push_back(toml::array{v.x, v.y});
      tiers.push_back(toml::table{{"height", tier.height}, {"vertices", std::move(verts)}});
    }
    objects.push_back(toml::table{{"id", m.id}, {"mass", m.mass}, {"friction_mu", m.friction_mu}, {"tier", std::move(tiers)}});
  }
  std::ostringstream ss;
  ss << toml::table{{"object", std::move(objects)}} << '\n';
  return ss.str();
}

/// Everything needed to render one scene file.
struct SceneFile {
  SceneSpec spec;
  NoiseModel noise;
  CameraIntrinsics intrinsics;
  CameraPose camera;
};

inline ScenePlacement parse_placement(const toml::table& t, std::string_view path) {
  cfg::reject_unknown(t, path, {"object", "x", "y", "yaw_deg"});
  ScenePlacement p;
  p.object_id = cfg::req_string(t, path, "object");
  p.x = cfg::get_double(t, path, "x", 0.0);
  p.y = cfg::get_double(t, path, "y", 0.0);
  p.yaw = cfg::get_double(t, path, "yaw_deg", 0.0) * kDegree;
  return p;
}

inline SceneFile parse_scene(const toml::table& root, const std::filesystem::path& base_dir = {}) {
  cfg::reject_unknown(root, "", {"library", "workspace_size", "placement", "noise", "camera"});
  SceneFile s;
  if (auto lib = cfg::opt_string(root, "", "library")) {
    s.spec.objects = load_object_library(base_dir / *lib);
  } else {
    s.spec.objects = default_object_library();
  }
  s.spec.workspace_size = cfg::get_double(root, "", "workspace_size", s.spec.workspace_size);
  if (!(s.spec.workspace_size > 0.0)) cfg::fail("workspace_size", "must be positive");
  const auto places = cfg::table_array(root, "", "placement");
  for (std::size_t i = 0; i < places.size(); ++i) {
    const std::string p = cfg::index_path("placement", i);
    auto pl = parse_placement(*places[i], p);
    try {
      (void)s.spec.object(pl.object_id);
    } catch (const Error&) {
      cfg::fail(cfg::join(p, "object"), "unknown object id '" + pl.object_id + "'");
    }
    s.spec.placements.push_back(std::move(pl));
  }
  if (const auto* n = cfg::opt_table(root, "", "noise")) s.noise = parse_noise(*n, "noise");
  if (const auto* c = cfg::opt_table(root, "", "camera")) parse_camera(*c, "camera", s.intrinsics, s.camera);
  return s;
}

inline SceneFile load_scene_file(const std::filesystem::path& file) {
  return parse_scene(cfg::parse_file(file), file.parent_path());
}

}  // namespace graspbench
