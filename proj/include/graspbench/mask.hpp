/**
 * @file mask.hpp
 * @brief Mask-based planner: gripper-shaped templates at many rotations and
 * openings are slid densely over the heightmap and the best-scoring
 * placement wins.
 *
 * A template's score at a cell is mean(gap) - mean(fingers): high when the
 * object fills the space between the jaws and the fingers land on free space.
 * Two penalties are subtracted: the gap's mirror asymmetry about both jaw
 * axes, and the distance from the cell to the map's elevation-weighted
 * centroid. A placement is only valid when the fingers can descend, i.e.
 * max(fingers) + clearance <= p95(gap) - engagement.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "graspbench/error.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/perception.hpp"

namespace graspbench {

struct MaskTemplate {
  double opening = 0.0;
  double rotation = 0.0;  // grasp axis direction, [0, pi)
};

struct MaskParams {
  double rotation_step = std::numbers::pi / 18.0;
  int opening_count = 5;
  int stride = 1;
  double symmetry_weight = 1.0;   // per metre of mean mirror difference
  double centering_weight = 0.05; // per metre of distance to the centroid
};

struct Cell {
  int i = 0;
  int j = 0;
  friend bool operator==(Cell, Cell) = default;
};

/// Rotations 0, step, 2*step, ... below pi, times openings spaced evenly over
/// [min_opening, max_opening]; a single opening sits at max_opening.
/// Rotation-major order.
inline std::vector<MaskTemplate> generate_masks(const GripperModel& gripper, double rotation_step,
                                                int opening_count) {
  gripper.validate();
  if (!(rotation_step > 0.0)) throw Error(ErrorCode::ConfigError, "rotation_step must be positive");
  if (opening_count < 1) throw Error(ErrorCode::ConfigError, "opening_count must be at least 1");
  std::vector<double> openings;
  if (opening_count == 1) {
    openings.push_back(gripper.max_opening);
  } else {
    for (int k = 0; k < opening_count; ++k) {
      openings.push_back(gripper.min_opening +
                         (gripper.max_opening - gripper.min_opening) * k / (opening_count - 1));
    }
  }
  std::vector<MaskTemplate> out;
  for (int r = 0;; ++r) {
    const double rot = r * rotation_step;
    if (rot >= std::numbers::pi - 1e-12) break;
    for (double o : openings) out.push_back({o, rot});
  }
  return out;
}

/// Cell offsets covered by a template at a given grid resolution, in
/// row-major order, plus the offset extent including the footprint corners.
struct MaskKernel {
  MaskTemplate tmpl;
  std::vector<std::ptrdiff_t> gap;      // linear offsets, valid for the map width used to build it
  std::vector<std::ptrdiff_t> fingers;
  std::vector<std::ptrdiff_t> mirror_u;  // per gap cell: cell nearest its reflection across the jaw face axis
  std::vector<std::ptrdiff_t> mirror_v;  // per gap cell: reflection across the grasp axis
  int min_di = 0, max_di = 0, min_dj = 0, max_dj = 0;
  std::size_t p95_rank = 0;  // index into ascending gap values

  MaskKernel(const MaskTemplate& t, const GripperModel& gripper, double resolution, int map_cols) : tmpl(t) {
    const GraspFrame frame({0.0, 0.0}, t.rotation);
    const double half_u = t.opening / 2 + gripper.finger_thickness;
    const double half_v = gripper.finger_width / 2;
    for (double su : {-1.0, 1.0}) {
      for (double sv : {-1.0, 1.0}) {
        const Point2 c = frame.world(su * half_u, sv * half_v);
        const int di = static_cast<int>(std::lround(c.x / resolution));
        const int dj = static_cast<int>(std::lround(c.y / resolution));
        min_di = std::min(min_di, di);
        max_di = std::max(max_di, di);
        min_dj = std::min(min_dj, dj);
        max_dj = std::max(max_dj, dj);
      }
    }
    const int lo_i = min_di - 1, hi_i = max_di + 1, lo_j = min_dj - 1, hi_j = max_dj + 1;
    for (int dj = lo_j; dj <= hi_j; ++dj) {
      for (int di = lo_i; di <= hi_i; ++di) {
        const Point2 local = frame.local({di * resolution, dj * resolution});
        const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(dj) * map_cols + di;
        bool used = false;
        if (in_gap_region(local, t.opening, gripper.finger_width)) {
          gap.push_back(off);
          used = true;
        } else if (in_finger_region(local, t.opening, gripper.finger_width, gripper.finger_thickness)) {
          fingers.push_back(off);
          used = true;
        }
        if (used) {
          min_di = std::min(min_di, di);
          max_di = std::max(max_di, di);
          min_dj = std::min(min_dj, dj);
          max_dj = std::max(max_dj, dj);
        }
      }
    }
    for (int dj = lo_j; dj <= hi_j; ++dj) {
      for (int di = lo_i; di <= hi_i; ++di) {
        const Point2 local = frame.local({di * resolution, dj * resolution});
        if (!in_gap_region(local, t.opening, gripper.finger_width)) continue;
        for (auto* dst : {&mirror_u, &mirror_v}) {
          const Point2 m = dst == &mirror_u ? frame.world(-local.x, local.y) : frame.world(local.x, -local.y);
          const int mi = static_cast<int>(std::lround(m.x / resolution));
          const int mj = static_cast<int>(std::lround(m.y / resolution));
          dst->push_back(static_cast<std::ptrdiff_t>(mj) * map_cols + mi);
          min_di = std::min(min_di, mi);
          max_di = std::max(max_di, mi);
          min_dj = std::min(min_dj, mj);
          max_dj = std::max(max_dj, mj);
        }
      }
    }
    if (!gap.empty()) {
      p95_rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(gap.size()))) - 1;
    }
  }

  bool fits(const HeightMap& map, Cell c) const {
    return c.i + min_di >= 0 && c.j + min_dj >= 0 && c.i + max_di < map.cols && c.j + max_dj < map.rows;
  }
};

namespace detail {

struct RegionSums {
  double gap_sum = 0.0;
  double finger_sum = 0.0;
  double finger_max = 0.0;
};

inline double kernel_score(const MaskKernel& k, double gap_sum, double finger_sum, double asym_sum,
                           double symmetry_weight) {
  const double n = static_cast<double>(k.gap.size());
  const double f = k.fingers.empty() ? 0.0 : finger_sum / static_cast<double>(k.fingers.size());
  return gap_sum / n - f - symmetry_weight * asym_sum / (2.0 * n);
}

inline double asymmetry_sum(const MaskKernel& k, const double* base) {
  double a = 0.0;
  for (std::size_t q = 0; q < k.gap.size(); ++q) {
    const double h = base[k.gap[q]];
    a += std::abs(h - base[k.mirror_u[q]]) + std::abs(h - base[k.mirror_v[q]]);
  }
  return a;
}

/// Threshold the gap's p95 must clear (after subtracting engagement).
inline double descent_lhs(double finger_max, const GripperModel& gripper) {
  return finger_max + gripper.fingertip_clearance;
}

/// Fast evaluation used inside the dense search: the p95 test is done by
/// counting instead of sorting, which is equivalent for a nearest-rank
/// percentile.
inline std::optional<double> kernel_eval(const HeightMap& map, const MaskKernel& k, Cell c,
                                         const GripperModel& gripper, double symmetry_weight) {
  if (k.gap.empty() || !k.fits(map, c)) return std::nullopt;
  const double* base = map.elevation.data() + map.index(c.i, c.j);
  double finger_max = k.fingers.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  double finger_sum = 0.0;
  for (auto off : k.fingers) {
    const double v = base[off];
    finger_max = std::max(finger_max, v);
    finger_sum += v;
  }
  const double lhs = descent_lhs(finger_max, gripper);
  const std::size_t needed = k.gap.size() - k.p95_rank;
  std::size_t count = 0;
  double gap_sum = 0.0;
  for (auto off : k.gap) {
    const double v = base[off];
    gap_sum += v;
    if (v - gripper.engagement_depth >= lhs) ++count;
  }
  if (count < needed) return std::nullopt;
  return kernel_score(k, gap_sum, finger_sum, asymmetry_sum(k, base), symmetry_weight);
}

}  // namespace detail

/// Elevation-weighted centroid of the positive cells; the map centre when
/// nothing rises above the table.
inline Point2 map_centroid(const HeightMap& map) {
  double w = 0.0, sx = 0.0, sy = 0.0;
  for (int j = 0; j < map.rows; ++j) {
    for (int i = 0; i < map.cols; ++i) {
      const double h = map.at(i, j);
      if (h <= 0.0) continue;
      const Point2 c = map.cell_center(i, j);
      w += h;
      sx += h * c.x;
      sy += h * c.y;
    }
  }
  if (w > 0.0) return {sx / w, sy / w};
  return map.cell_center(0, 0) + 0.5 * map.resolution * Vec2{static_cast<double>(map.cols - 1), static_cast<double>(map.rows - 1)};
}

/// Score of one template at one cell, or nullopt when the fingers cannot
/// descend or the footprint leaves the map.
inline std::optional<double> mask_score(const HeightMap& map, const MaskTemplate& tmpl, Cell center,
                                        const GripperModel& gripper, const MaskParams& params = {}) {
  const MaskKernel k(tmpl, gripper, map.resolution, map.cols);
  if (k.gap.empty() || !k.fits(map, center)) return std::nullopt;
  const double* base = map.elevation.data() + map.index(center.i, center.j);
  std::vector<double> gap_values;
  gap_values.reserve(k.gap.size());
  double gap_sum = 0.0;
  for (auto off : k.gap) {
    gap_values.push_back(base[off]);
    gap_sum += base[off];
  }
  double finger_max = k.fingers.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  double finger_sum = 0.0;
  for (auto off : k.fingers) {
    finger_max = std::max(finger_max, base[off]);
    finger_sum += base[off];
  }
  std::sort(gap_values.begin(), gap_values.end());
  const double p95 = gap_values[k.p95_rank];
  if (!(p95 - gripper.engagement_depth >= detail::descent_lhs(finger_max, gripper))) return std::nullopt;
  const double base_score =
      detail::kernel_score(k, gap_sum, finger_sum, detail::asymmetry_sum(k, base), params.symmetry_weight);
  return base_score - params.centering_weight * distance(map.cell_center(center.i, center.j), map_centroid(map));
}

/// Per-cell best template over the sampled set.
struct MaskScoreField {
  int cols = 0;
  int rows = 0;
  std::vector<double> score;
  std::vector<double> rotation;
  std::vector<double> opening;
  std::vector<std::uint8_t> valid;

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * cols + i; }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }
};

inline MaskScoreField compute_score_field(const HeightMap& map, const GripperModel& gripper,
                                          const MaskParams& params = {}) {
  if (params.stride < 1) throw Error(ErrorCode::ConfigError, "stride must be at least 1");
  const auto templates = generate_masks(gripper, params.rotation_step, params.opening_count);
  MaskScoreField field;
  field.cols = map.cols;
  field.rows = map.rows;
  const std::size_t n = map.elevation.size();
  field.score.assign(n, 0.0);
  field.rotation.assign(n, 0.0);
  field.opening.assign(n, 0.0);
  field.valid.assign(n, 0);
  if (map.empty()) return field;

  std::vector<MaskKernel> kernels;
  kernels.reserve(templates.size());
  int reach = 0;
  for (const auto& t : templates) {
    kernels.emplace_back(t, gripper, map.resolution, map.cols);
    const auto& k = kernels.back();
    reach = std::max({reach, -k.min_di, k.max_di, -k.min_dj, k.max_dj});
  }

  // A valid placement needs a gap cell at least clearance + engagement above
  // the lowest cell of the map; centres farther than the kernel reach from
  // every such cell are skipped.
  const double min_elev = *std::min_element(map.elevation.begin(), map.elevation.end());
  const double relief = min_elev + gripper.fingertip_clearance + gripper.engagement_depth - 1e-9;
  int lo_i = map.cols, hi_i = -1, lo_j = map.rows, hi_j = -1;
  for (int j = 0; j < map.rows; ++j) {
    for (int i = 0; i < map.cols; ++i) {
      if (map.at(i, j) >= relief) {
        lo_i = std::min(lo_i, i);
        hi_i = std::max(hi_i, i);
        lo_j = std::min(lo_j, j);
        hi_j = std::max(hi_j, j);
      }
    }
  }
  if (hi_i < 0) return field;
  lo_i = std::max(0, lo_i - reach);
  hi_i = std::min(map.cols - 1, hi_i + reach);
  lo_j = std::max(0, lo_j - reach);
  hi_j = std::min(map.rows - 1, hi_j + reach);

  const Point2 centroid = map_centroid(map);
  for (int j = lo_j; j <= hi_j; ++j) {
    if (j % params.stride != 0) continue;
    for (int i = lo_i; i <= hi_i; ++i) {
      if (i % params.stride != 0) continue;
      const std::size_t idx = field.index(i, j);
      const double offset = params.centering_weight * distance(map.cell_center(i, j), centroid);
      for (const auto& k : kernels) {
        auto s = detail::kernel_eval(map, k, {i, j}, gripper, params.symmetry_weight);
        if (!s) continue;
        *s -= offset;
        const bool better = !field.valid[idx] || *s > field.score[idx] ||
                            (*s == field.score[idx] && k.tmpl.opening < field.opening[idx]);
        if (better) {
          field.valid[idx] = 1;
          field.score[idx] = *s;
          field.rotation[idx] = k.tmpl.rotation;
          field.opening[idx] = k.tmpl.opening;
        }
      }
    }
  }
  return field;
}

/// Grasps from every valid cell of the score field, ranked best first.
inline std::vector<GraspPose> synthesize_mask(const HeightMap& map, const GripperModel& gripper,
                                              const MaskParams& params = {}) {
  if (map.empty()) throw Error(ErrorCode::NoFeasibleGrasp, "empty heightmap");
  const auto field = compute_score_field(map, gripper, params);
  const double norm_by = map.max_elevation();
  std::vector<GraspPose> out;
  for (int j = 0; j < map.rows; ++j) {
    for (int i = 0; i < map.cols; ++i) {
      const std::size_t idx = field.index(i, j);
      if (!field.valid[idx]) continue;
      GraspPose g;
      const Point2 c = map.cell_center(i, j);
      g.x = c.x;
      g.y = c.y;
      g.theta = field.rotation[idx];
      g.width = field.opening[idx];
      g.quality = norm_by > 0.0 ? std::clamp(field.score[idx] / norm_by, -1.0, 1.0) : 0.0;
      try {
        g.z = compute_grasp_depth(map, g.x, g.y, g.theta, g.width, gripper);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfBounds) throw;
        continue;
      }
      out.push_back(g);
    }
  }
  if (out.empty()) throw Error(ErrorCode::NoFeasibleGrasp, "no template placement lets the fingers descend");
  std::stable_sort(out.begin(), out.end(), grasp_rank_less);
  return out;
}

struct MaskPipelineParams {
  double resolution = kDefaultHeightmapResolution;
  double min_height = kDefaultTableEpsilon;
  MaskParams search;
};

/// Heightmap of the whole cloud with everything but the largest object
/// flattened to the table, the form synthesize_mask expects.
inline HeightMap object_heightmap(const PointCloud& cloud, double resolution, double min_height) {
  const auto map = to_heightmap(cloud, resolution);
  if (map.empty()) throw Error(ErrorCode::EmptyScene, "empty point cloud");
  return isolate(map, segment_largest_object(map, min_height));
}

inline std::vector<GraspPose> plan_mask(const PointCloud& cloud, const GripperModel& gripper,
                                        const MaskPipelineParams& params = {}) {
  HeightMap map;
  try {
    map = object_heightmap(cloud, params.resolution, params.min_height);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyScene) throw Error(ErrorCode::NoFeasibleGrasp, "no object in view");
    throw;
  }
  return synthesize_mask(map, gripper, params.search);
}

}  // namespace graspbench
