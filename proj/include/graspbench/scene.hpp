/**
 * @file scene.hpp
 * @brief Synthetic table-top scenes and the deterministic grasp oracle.
 *
 * Objects are stacks of extruded polygons ("tiers"). The solid above a table
 * point p occupies z in [0, H(p)), where H(p) is the summed height of every
 * tier whose footprint contains p; heightmaps, depth renders and the grasp
 * oracle all read this one column model.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graspbench/error.hpp"
#include "graspbench/geometry.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/perception.hpp"
#include "graspbench/rng.hpp"

namespace graspbench {

struct Tier {
  Polygon footprint;  // object frame
  double height;
};

struct ObjectModel {
  std::string id;
  std::vector<Tier> tiers;
  double mass = 0.1;
  double friction_mu = 0.5;

  void validate() const {
    if (id.empty()) throw Error(ErrorCode::ConfigError, "object id must not be empty");
    if (tiers.empty() || tiers.size() > 4) throw Error(ErrorCode::ConfigError, "object '" + id + "' needs 1-4 tiers");
    for (const auto& t : tiers) {
      if (!(t.height > 0.0)) throw Error(ErrorCode::ConfigError, "object '" + id + "' has a non-positive tier height");
    }
    if (!(mass > 0.0)) throw Error(ErrorCode::ConfigError, "object '" + id + "' mass must be positive");
    if (!(friction_mu > 0.0 && friction_mu <= 2.0)) {
      throw Error(ErrorCode::ConfigError, "object '" + id + "' friction_mu must be in (0, 2]");
    }
  }

  /// Volume centroid of the tier stack (uniform density), object frame.
  Point2 center_of_mass() const {
    double w = 0.0;
    Point2 acc{};
    for (const auto& t : tiers) {
      const double v = t.footprint.area() * t.height;
      acc = acc + v * polygon_centroid(t.footprint);
      w += v;
    }
    return {acc.x / w, acc.y / w};
  }

  double total_height() const {
    double h = 0.0;
    for (const auto& t : tiers) h += t.height;
    return h;
  }
};

struct ScenePlacement {
  std::string object_id;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct NoiseModel {
  double gaussian_sigma = 0.0;
  double dropout_probability = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gaussian_sigma >= 0.0)) throw Error(ErrorCode::ConfigError, "noise sigma must be >= 0");
    if (!(dropout_probability >= 0.0 && dropout_probability < 1.0)) {
      throw Error(ErrorCode::ConfigError, "dropout probability must be in [0, 1)");
    }
  }
};

struct SceneSpec {
  std::vector<ObjectModel> objects;  // library the placements refer to
  std::vector<ScenePlacement> placements;
  double workspace_size = 0.6;       // square workspace centred on the table origin

  const ObjectModel& object(std::string_view id) const {
    for (const auto& o : objects) {
      if (o.id == id) return o;
    }
    throw Error(ErrorCode::ConfigError, "unknown object id '" + std::string(id) + "'");
  }
};

enum class FailureReason {
  None,
  MissedObject,
  CollisionOnDescent,
  WidthInfeasible,
  NotForceClosure,
  SlipWeight,
  SlipYawTorque,
  SlipShake,
};

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::MissedObject: return "missed_object";
    case FailureReason::CollisionOnDescent: return "collision_on_descent";
    case FailureReason::WidthInfeasible: return "width_infeasible";
    case FailureReason::NotForceClosure: return "not_force_closure";
    case FailureReason::SlipWeight: return "slip_weight";
    case FailureReason::SlipYawTorque: return "slip_yaw_torque";
    case FailureReason::SlipShake: return "slip_shake";
  }
  return "none";
}

struct Contact {
  Point2 point;
  Vec2 inward_normal;  // into the object
  std::size_t object = 0;
};

struct PickOutcome {
  bool lifted = false;
  bool yaw_pass = false;
  bool shake_pass = false;
  FailureReason failure_reason = FailureReason::None;
  // Diagnostics, filled as far as the check sequence got.
  std::optional<Contact> contact_a;
  std::optional<Contact> contact_b;
  double closure_span = 0.0;
};

struct PhysicsParams {
  double grip_force = 20.0;  // N
  double gravity = 9.81;
  double shake_multiplier = 2.0;
  double width_tolerance = 0.005;
  double yaw_angle = std::numbers::pi / 4;
  double collision_sample_step = 0.0005;
};

/// Rectangle helper (object frame, CCW).
inline Polygon rect_footprint(double size_x, double size_y, double cx = 0.0, double cy = 0.0) {
  const double hx = size_x / 2, hy = size_y / 2;
  return Polygon({{cx - hx, cy - hy}, {cx + hx, cy - hy}, {cx + hx, cy + hy}, {cx - hx, cy + hy}});
}

inline Polygon disk_footprint(double radius, int segments = 48, double cx = 0.0, double cy = 0.0) {
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(segments));
  for (int k = 0; k < segments; ++k) {
    const double a = 2.0 * std::numbers::pi * k / segments;
    v.push_back({cx + radius * std::cos(a), cy + radius * std::sin(a)});
  }
  return Polygon(std::move(v));
}

/**
 * Parametric stand-ins for the benchmark objects. Flat-topped boxes, a
 * cylinder, a thin bar, two stepped clamps, and objects whose top surface is
 * small or offset from the body (pear, mustard, lopsided clamp).
 */
inline std::vector<ObjectModel> default_object_library() {
  std::vector<ObjectModel> lib;
  auto add = [&](std::string id, std::vector<Tier> tiers, double mass, double mu) {
    lib.push_back(ObjectModel{std::move(id), std::move(tiers), mass, mu});
  };
  add("cracker_box", {{rect_footprint(0.16, 0.06), 0.21}}, 0.411, 0.5);
  add("chips_can", {{disk_footprint(0.0375), 0.25}}, 0.205, 0.5);
  add("marker", {{rect_footprint(0.12, 0.02), 0.028}}, 0.015, 0.4);
  add("medium_clamp", {{rect_footprint(0.09, 0.03), 0.02}, {rect_footprint(0.04, 0.03, 0.025, 0.0), 0.03}}, 0.06, 0.4);
  // Top jaw sits at one end and hangs toward +y: the top surface is far from
  // the centre of mass.
  add("small_clamp", {{rect_footprint(0.085, 0.03), 0.015}, {rect_footprint(0.035, 0.018, 0.028, 0.012), 0.02}},
      0.5, 0.25);
  // Body, shoulder and a stem narrower than the gripper's minimum opening.
  add("pear", {{disk_footprint(0.033), 0.045}, {disk_footprint(0.024), 0.02}, {disk_footprint(0.004, 16), 0.012}},
      0.18, 0.5);
  // Tall bottle with a narrow cap off-centre along y.
  add("mustard", {{rect_footprint(0.095, 0.058), 0.16}, {rect_footprint(0.016, 0.026, 0.0, 0.016), 0.03}}, 0.58,
      0.3);
  add("wide_plate", {{rect_footprint(0.15, 0.07), 0.03}}, 0.15, 0.5);
  add("small_cube", {{rect_footprint(0.045, 0.045), 0.045}}, 0.05, 0.5);
  add("dome_puck", {{disk_footprint(0.035), 0.015}, {disk_footprint(0.027), 0.008}, {disk_footprint(0.016), 0.007}},
      0.08, 0.5);
  return lib;
}

/// Scene with every placement resolved to world-frame tiers.
class PlacedScene {
 public:
  struct WorldTier {
    Polygon poly;
    double height;
    Point2 lo, hi;
  };
  struct WorldObject {
    const ObjectModel* model;
    std::vector<WorldTier> tiers;
    Point2 lo, hi;
    double top;
    Point2 center_of_mass;
  };

  explicit PlacedScene(const SceneSpec& spec) {
    const double half = spec.workspace_size / 2;
    for (const auto& pl : spec.placements) {
      const ObjectModel& m = spec.object(pl.object_id);
      m.validate();
      WorldObject wo{&m, {}, {1e300, 1e300}, {-1e300, -1e300}, m.total_height(), {}};
      for (const auto& t : m.tiers) {
        Polygon p = t.footprint.transformed(pl.yaw, {pl.x, pl.y});
        Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const auto& v : p.vertices()) {
          if (std::abs(v.x) > half + 1e-12 || std::abs(v.y) > half + 1e-12) {
            throw Error(ErrorCode::PlacementOutOfBounds, "object '" + m.id + "' extends beyond the workspace");
          }
          lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
          hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
        }
        wo.lo = {std::min(wo.lo.x, lo.x), std::min(wo.lo.y, lo.y)};
        wo.hi = {std::max(wo.hi.x, hi.x), std::max(wo.hi.y, hi.y)};
        wo.tiers.push_back({std::move(p), t.height, lo, hi});
      }
      wo.center_of_mass = rotated(m.center_of_mass(), pl.yaw) + Point2{pl.x, pl.y};
      objects_.push_back(std::move(wo));
    }
    for (const auto& o : objects_) max_top_ = std::max(max_top_, o.top);
  }

  const std::vector<WorldObject>& objects() const { return objects_; }
  double max_top() const { return max_top_; }

  /// Solid column height at p, summed over all objects.
  double column_height(Point2 p) const {
    double h = 0.0;
    for (const auto& o : objects_) h += object_height(o, p);
    return h;
  }

  double object_height(const WorldObject& o, Point2 p) const {
    if (p.x < o.lo.x || p.x > o.hi.x || p.y < o.lo.y || p.y > o.hi.y) return 0.0;
    double h = 0.0;
    for (const auto& t : o.tiers) {
      if (p.x < t.lo.x || p.x > t.hi.x || p.y < t.lo.y || p.y > t.hi.y) continue;
      if (t.poly.contains(p)) h += t.height;
    }
    return h;
  }

  /// Index of the object whose column contains p, if any.
  std::optional<std::size_t> object_at(Point2 p) const {
    for (std::size_t k = 0; k < objects_.size(); ++k) {
      if (object_height(objects_[k], p) > 0.0) return k;
    }
    return std::nullopt;
  }

  struct Crossing {
    double t;
    Vec2 outward;  // outward normal of the crossed edge
  };

  /// Parameters t in (t_lo, t_hi) where origin + t*dir crosses a tier edge.
  void crossings(Point2 origin, Vec2 dir, double t_lo, double t_hi, std::vector<Crossing>& out) const {
    const Point2 e0 = origin + t_lo * dir, e1 = origin + t_hi * dir;
    const Point2 lo{std::min(e0.x, e1.x), std::min(e0.y, e1.y)};
    const Point2 hi{std::max(e0.x, e1.x), std::max(e0.y, e1.y)};
    for (const auto& o : objects_) {
      if (hi.x < o.lo.x || lo.x > o.hi.x || hi.y < o.lo.y || lo.y > o.hi.y) continue;
      for (const auto& t : o.tiers) {
        if (hi.x < t.lo.x || lo.x > t.hi.x || hi.y < t.lo.y || lo.y > t.hi.y) continue;
        for (std::size_t e = 0; e < t.poly.size(); ++e) {
          const auto [a, b] = t.poly.edge(e);
          const Vec2 s = b - a;
          const double denom = cross(dir, s);
          if (denom == 0.0) continue;
          const Vec2 ao = a - origin;
          const double tt = cross(ao, s) / denom;
          const double uu = cross(ao, dir) / denom;
          if (tt <= t_lo || tt >= t_hi || uu < 0.0 || uu > 1.0) continue;
          const Vec2 d = normalized(s);
          out.push_back({tt, {d.y, -d.x}});
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) { return x.t < y.t; });
  }

 private:
  std::vector<WorldObject> objects_;
  double max_top_ = 0.0;
};

/// Analytic elevation on the lattice covering the workspace (cell centres at
/// multiples of @p resolution).
inline HeightMap render_heightmap(const SceneSpec& scene, double resolution = kDefaultHeightmapResolution) {
  if (!(resolution > 0.0)) throw Error(ErrorCode::DegenerateInput, "resolution must be positive");
  const PlacedScene placed(scene);
  const int n = static_cast<int>(std::floor(scene.workspace_size / 2 / resolution + 1e-9));
  HeightMap map(resolution, {-n * resolution, -n * resolution}, 2 * n + 1, 2 * n + 1);
  for (int j = 0; j < map.rows; ++j) {
    for (int i = 0; i < map.cols; ++i) {
      map.at(i, j) = placed.column_height(map.cell_center(i, j));
    }
  }
  std::fill(map.valid.begin(), map.valid.end(), std::uint8_t{1});
  return map;
}

/// Noise-free depth of the first surface along one pixel ray.
inline double trace_depth(const PlacedScene& placed, const CameraPose& pose, Vec2 ray,
                          std::vector<PlacedScene::Crossing>& scratch) {
  const double h = pose.height_above_table;
  const double d_lo = std::max(0.0, h - placed.max_top());
  scratch.clear();
  placed.crossings(pose.planar_offset, ray, d_lo, h, scratch);
  double start = d_lo;
  for (std::size_t k = 0; k <= scratch.size(); ++k) {
    const double end = k < scratch.size() ? scratch[k].t : h;
    const double mid = 0.5 * (start + end);
    const double top = placed.column_height(pose.planar_offset + mid * ray);
    const double surface = h - top;  // depth at which this column's top is met
    if (surface <= start) return start;
    if (surface <= end) return surface;
    start = end;
  }
  return h;
}

/**
 * Pinhole depth render from a top-down camera. Noise and dropout are drawn
 * from a counter-based stream keyed by (seed, pixel index); depths are
 * quantized to 0.1 mm like the 16-bit PNG encoding.
 */
inline DepthImage render_depth(const SceneSpec& scene, const CameraIntrinsics& k, const CameraPose& pose,
                               const NoiseModel& noise = {}) {
  k.validate();
  pose.validate();
  noise.validate();
  const PlacedScene placed(scene);
  DepthImage img(k.width, k.height);
  std::vector<PlacedScene::Crossing> scratch;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const auto idx = static_cast<std::uint64_t>(v) * k.width + u;
      double d = trace_depth(placed, pose, pixel_ray_direction(u, v, k, pose), scratch);
      if (noise.gaussian_sigma > 0.0) d += noise.gaussian_sigma * rng::gaussian(noise.seed, 1, idx);
      if (noise.dropout_probability > 0.0 && rng::uniform(noise.seed, 2, idx) < noise.dropout_probability) d = 0.0;
      const auto q = std::llround(d * 10000.0);
      img.at(u, v) = (q > 0 && q <= 65535) ? static_cast<double>(q) / 10000.0 : 0.0;
    }
  }
  return img;
}

/// Antipodal test for two point contacts: the line between the contacts must
/// lie inside both friction cones (half-angle atan(mu)).
inline bool antipodal_force_closure(Point2 contact_a, Vec2 inward_a, Point2 contact_b, Vec2 inward_b, double mu) {
  const Vec2 line = contact_b - contact_a;
  const double len = norm(line);
  if (len <= 0.0) return false;
  const Vec2 d{line.x / len, line.y / len};
  const double cos_cone = 1.0 / std::sqrt(1.0 + mu * mu);
  const double tol = 1e-12;
  return dot(normalized(inward_a), d) >= cos_cone - tol && dot(normalized(inward_b), Vec2{-d.x, -d.y}) >= cos_cone - tol;
}

namespace detail {

/// Closest point where a jaw sweeping from @p start along @p dir meets
/// material above height z, within [0, max_t].
inline std::optional<std::pair<double, Contact>> jaw_contact(const PlacedScene& placed, Point2 start, Vec2 dir,
                                                             double max_t, double z) {
  std::vector<PlacedScene::Crossing> xs;
  placed.crossings(start, dir, -1e-12, max_t, xs);
  double begin = 0.0;
  std::optional<Vec2> edge_normal;
  for (std::size_t k = 0; k <= xs.size(); ++k) {
    const double end = k < xs.size() ? std::max(xs[k].t, 0.0) : max_t;
    if (end > begin) {
      const Point2 mid = start + (0.5 * (begin + end)) * dir;
      if (placed.column_height(mid) > z) {
        const Point2 p = start + begin * dir;
        const Vec2 outward = edge_normal.value_or(Vec2{-dir.x, -dir.y});
        const auto obj = placed.object_at(mid).value_or(0);
        return std::make_pair(begin, Contact{p, {-outward.x, -outward.y}, obj});
      }
    }
    if (k < xs.size()) {
      if (xs[k].t > begin || !edge_normal) edge_normal = xs[k].outward;
      begin = std::max(begin, end);
    }
  }
  return std::nullopt;
}

inline bool material_above(const PlacedScene& placed, const GraspFrame& frame, double u0, double u1,
                           double half_v, double z, double step) {
  const int nu = std::max(2, static_cast<int>(std::ceil((u1 - u0) / step)) + 1);
  const int nv = std::max(2, static_cast<int>(std::ceil(2 * half_v / step)) + 1);
  for (int a = 0; a < nu; ++a) {
    const double lu = u0 + (u1 - u0) * a / (nu - 1);
    for (int b = 0; b < nv; ++b) {
      const double lv = -half_v + 2 * half_v * b / (nv - 1);
      for (double side : {-1.0, 1.0}) {
        if (placed.column_height(frame.world(side * lu, lv)) > z) return true;
      }
    }
  }
  return false;
}

}  // namespace detail

/**
 * Quasi-static pick check, stopping at the first failure:
 * descent collision under the fingers, jaw closure onto the cross-section at
 * the fingertip height, friction-cone antipodality, then the load check
 * 2*mu*F >= m*g. Fingertips are modelled as point contacts on the grasp axis.
 * The jaws descend opened to width + width_tolerance (capped at the maximum
 * opening).
 */
inline PickOutcome evaluate_pick(const PlacedScene& placed, const GraspPose& grasp, const GripperModel& gripper,
                                 const PhysicsParams& phys = {}) {
  PickOutcome out;
  const GraspFrame frame(grasp.center(), grasp.theta);
  const double opening = std::min(grasp.width + phys.width_tolerance, gripper.max_opening);
  const double z = grasp.z;

  if (detail::material_above(placed, frame, opening / 2 + 1e-6, opening / 2 + gripper.finger_thickness,
                             gripper.finger_width / 2, z, phys.collision_sample_step)) {
    out.failure_reason = FailureReason::CollisionOnDescent;
    return out;
  }

  const Point2 jaw_a = frame.world(-opening / 2, 0.0);
  const Point2 jaw_b = frame.world(opening / 2, 0.0);
  const auto hit_a = detail::jaw_contact(placed, jaw_a, frame.u, opening, z);
  const auto hit_b = detail::jaw_contact(placed, jaw_b, Vec2{-frame.u.x, -frame.u.y}, opening, z);
  if (!hit_a || !hit_b) {
    out.failure_reason = FailureReason::MissedObject;
    return out;
  }
  out.contact_a = hit_a->second;
  out.contact_b = hit_b->second;
  out.closure_span = opening - hit_a->first - hit_b->first;
  if (out.closure_span < gripper.min_opening - 1e-12 || out.closure_span > grasp.width + phys.width_tolerance + 1e-12) {
    out.failure_reason = FailureReason::WidthInfeasible;
    return out;
  }

  const auto& object = placed.objects()[out.contact_a->object];
  const double mu = object.model->friction_mu;
  if (!antipodal_force_closure(out.contact_a->point, out.contact_a->inward_normal, out.contact_b->point,
                               out.contact_b->inward_normal, mu)) {
    out.failure_reason = FailureReason::NotForceClosure;
    return out;
  }

  if (2.0 * mu * phys.grip_force < object.model->mass * phys.gravity) {
    out.failure_reason = FailureReason::SlipWeight;
    return out;
  }
  out.lifted = true;
  return out;
}

inline PickOutcome evaluate_pick(const SceneSpec& scene, const GraspPose& grasp, const GripperModel& gripper,
                                 const PhysicsParams& phys = {}) {
  return evaluate_pick(PlacedScene(scene), grasp, gripper, phys);
}

struct StabilityResult {
  bool yaw_pass = false;
  bool shake_pass = false;
};

/// Distance from the grasp axis line to the centre-of-mass projection.
inline double com_offset(const GraspPose& grasp, Point2 center_of_mass) {
  return std::abs(cross(grasp.axis(), center_of_mass - grasp.center()));
}

/**
 * Post-lift checks. Yaw: gravity torque about the grasp axis at the tilt
 * angle must not exceed the frictional torque mu*F*(finger_width/2). Shake:
 * the grip must hold shake_multiplier times the object's weight.
 */
inline StabilityResult evaluate_stability(const PickOutcome& outcome, const GraspPose& grasp,
                                          Point2 center_of_mass, double mass, double mu,
                                          const GripperModel& gripper, const PhysicsParams& phys = {}) {
  if (!outcome.lifted) return {};
  const double torque = mass * phys.gravity * std::sin(phys.yaw_angle) * com_offset(grasp, center_of_mass);
  const double capacity = mu * phys.grip_force * (gripper.finger_width / 2);
  StabilityResult r;
  r.yaw_pass = torque <= capacity;
  r.shake_pass = 2.0 * mu * phys.grip_force >= phys.shake_multiplier * mass * phys.gravity;
  return r;
}

/// Full pick, yaw and shake evaluation for one grasp.
inline PickOutcome evaluate_grasp(const PlacedScene& placed, const GraspPose& grasp, const GripperModel& gripper,
                                  const PhysicsParams& phys = {}) {
  PickOutcome out = evaluate_pick(placed, grasp, gripper, phys);
  if (!out.lifted) return out;
  const auto& object = placed.objects()[out.contact_a->object];
  const auto s = evaluate_stability(out, grasp, object.center_of_mass, object.model->mass, object.model->friction_mu,
                                    gripper, phys);
  out.yaw_pass = s.yaw_pass;
  out.shake_pass = s.shake_pass;
  if (!s.yaw_pass) {
    out.failure_reason = FailureReason::SlipYawTorque;
  } else if (!s.shake_pass) {
    out.failure_reason = FailureReason::SlipShake;
  }
  return out;
}

}  // namespace graspbench
