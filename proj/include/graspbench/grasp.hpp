/**
 * @file grasp.hpp
 * @brief Parallel-jaw gripper geometry, planar grasp poses and the shared
 * fingertip depth computation used by both planners.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "graspbench/error.hpp"
#include "graspbench/geometry.hpp"
#include "graspbench/perception.hpp"

namespace graspbench {

struct GripperModel {
  double max_opening = 0.08;
  double min_opening = 0.01;
  double finger_width = 0.02;        // contact patch length along the jaw face
  double finger_thickness = 0.01;    // jaw depth along the grasp axis
  double engagement_depth = 0.02;    // fingertip descent below the grasped top
  double fingertip_clearance = 0.005;

  void validate() const {
    if (!(min_opening >= 0.0 && min_opening < max_opening)) {
      throw Error(ErrorCode::ConfigError, "gripper requires 0 <= min_opening < max_opening");
    }
    if (!(finger_width > 0.0 && finger_thickness > 0.0 && engagement_depth > 0.0 && fingertip_clearance > 0.0)) {
      throw Error(ErrorCode::ConfigError, "gripper dimensions must be positive");
    }
  }
};

/// Folds any angle into [0, pi).
inline double canonical_theta(double theta) {
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(theta, pi);
  if (t < 0.0) t += pi;
  if (t >= pi) t -= pi;
  return t;
}

/// Planar top-down grasp. theta is the direction of the line joining the two
/// contacts (the jaw closing axis).
struct GraspPose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double width = 0.0;
  double quality = 0.0;

  Point2 center() const { return {x, y}; }
  Vec2 axis() const { return {std::cos(theta), std::sin(theta)}; }
  friend bool operator==(const GraspPose&, const GraspPose&) = default;
};

/// Empty string when the pose satisfies the gripper's invariants, otherwise a
/// description of the first violated one.
inline std::string grasp_violation(const GraspPose& g, const GripperModel& gripper) {
  for (double v : {g.x, g.y, g.z, g.theta, g.width, g.quality}) {
    if (!std::isfinite(v)) return "non-finite field";
  }
  if (g.width < gripper.min_opening - 1e-12 || g.width > gripper.max_opening + 1e-12) return "width outside gripper range";
  if (g.z < 0.0) return "negative z";
  if (g.theta < 0.0 || g.theta >= std::numbers::pi) return "theta not in [0, pi)";
  if (g.quality < -1.0 - 1e-12 || g.quality > 1.0 + 1e-12) return "quality outside [-1, 1]";
  return {};
}

/// Orders grasps best first: quality descending, then narrower width, then
/// lexicographic (x, y, theta).
inline bool grasp_rank_less(const GraspPose& a, const GraspPose& b) {
  if (a.quality != b.quality) return a.quality > b.quality;
  if (a.width != b.width) return a.width < b.width;
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.theta < b.theta;
}

/// Local frame of a grasp: u along the closing axis, v along the jaw face.
struct GraspFrame {
  Point2 center;
  Vec2 u;
  Vec2 v;

  GraspFrame(Point2 c, double theta)
      : center(c), u{std::cos(theta), std::sin(theta)}, v{-std::sin(theta), std::cos(theta)} {}

  Point2 local(Point2 p) const { return {dot(p - center, u), dot(p - center, v)}; }
  Point2 world(double lu, double lv) const { return center + lu * u + lv * v; }
};

inline constexpr double kRegionEps = 1e-9;

/// Gap region: the strip between the open jaws.
inline bool in_gap_region(Point2 local, double opening, double finger_width) {
  return std::abs(local.x) <= opening / 2 + kRegionEps && std::abs(local.y) <= finger_width / 2 + kRegionEps;
}

/// Finger regions: the two jaw footprints flanking the gap along the axis.
inline bool in_finger_region(Point2 local, double opening, double finger_width, double thickness) {
  const double a = std::abs(local.x);
  return a > opening / 2 + kRegionEps && a <= opening / 2 + thickness + kRegionEps &&
         std::abs(local.y) <= finger_width / 2 + kRegionEps;
}

struct FootprintCells {
  std::vector<std::size_t> gap;
  std::vector<std::size_t> fingers;
};

/// Heightmap cells whose centres fall in the gap and finger regions of a
/// grasp, in row-major order. Throws OutOfBounds when any corner of the
/// footprint leaves the map.
inline FootprintCells grasp_footprint_cells(const HeightMap& map, Point2 center, double theta, double opening,
                                            const GripperModel& gripper) {
  const GraspFrame frame(center, theta);
  const double half_u = opening / 2 + gripper.finger_thickness;
  const double half_v = gripper.finger_width / 2;
  int i_lo = map.cols, i_hi = -1, j_lo = map.rows, j_hi = -1;
  for (double su : {-1.0, 1.0}) {
    for (double sv : {-1.0, 1.0}) {
      const Point2 c = frame.world(su * half_u, sv * half_v);
      const int i = map.col_of(c.x);
      const int j = map.row_of(c.y);
      if (!map.in_bounds(i, j)) throw Error(ErrorCode::OutOfBounds, "grasp footprint leaves the heightmap");
      i_lo = std::min(i_lo, i);
      i_hi = std::max(i_hi, i);
      j_lo = std::min(j_lo, j);
      j_hi = std::max(j_hi, j);
    }
  }
  FootprintCells cells;
  for (int j = std::max(0, j_lo - 1); j <= std::min(map.rows - 1, j_hi + 1); ++j) {
    for (int i = std::max(0, i_lo - 1); i <= std::min(map.cols - 1, i_hi + 1); ++i) {
      const Point2 local = frame.local(map.cell_center(i, j));
      if (in_gap_region(local, opening, gripper.finger_width)) {
        cells.gap.push_back(map.index(i, j));
      } else if (in_finger_region(local, opening, gripper.finger_width, gripper.finger_thickness)) {
        cells.fingers.push_back(map.index(i, j));
      }
    }
  }
  return cells;
}

/// Highest observed elevation over @p cells. Filled cells (occlusion
/// shadows, dropout) are unknown; @p unobserved is returned when the region
/// holds no observed cell.
inline double observed_max(const HeightMap& map, const std::vector<std::size_t>& cells, double unobserved) {
  double m = -std::numeric_limits<double>::infinity();
  for (auto c : cells) {
    if (map.valid[c]) m = std::max(m, map.elevation[c]);
  }
  return std::isfinite(m) ? m : unobserved;
}

/**
 * Fingertip height for a grasp: engagement_depth below the highest point
 * between the jaws, but never lower than fingertip_clearance above whatever
 * lies under the fingers, and never below the table.
 */
inline double compute_grasp_depth(const HeightMap& map, double x, double y, double theta, double width,
                                  const GripperModel& gripper) {
  const auto cells = grasp_footprint_cells(map, {x, y}, theta, width, gripper);
  double h_top = map.at(map.col_of(x), map.row_of(y));
  if (!cells.gap.empty()) {
    double filled = -std::numeric_limits<double>::infinity();
    for (auto c : cells.gap) filled = std::max(filled, map.elevation[c]);
    h_top = observed_max(map, cells.gap, filled);
  }
  // Unseen ground under the fingers is taken to be table.
  const double under_fingers = observed_max(map, cells.fingers, 0.0);
  const double z_floor = under_fingers + gripper.fingertip_clearance;
  return std::max({h_top - gripper.engagement_depth, z_floor, 0.0});
}

}  // namespace graspbench
