/**
 * @file perception.hpp
 * @brief Depth image ingestion: deprojection into the table frame, table
 * removal, top-surface extraction, heightmap rasterization and single-object
 * segmentation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "graspbench/error.hpp"
#include "graspbench/geometry.hpp"

namespace graspbench {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend constexpr bool operator==(Point3, Point3) = default;
};

struct CameraIntrinsics {
  double fx = 615.0;
  double fy = 615.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;

  void validate() const {
    if (!(fx > 0.0 && fy > 0.0)) throw Error(ErrorCode::DimensionMismatch, "focal lengths must be positive");
    if (width <= 0 || height <= 0) throw Error(ErrorCode::DimensionMismatch, "image size must be positive");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
      throw Error(ErrorCode::DimensionMismatch, "principal point outside the image");
    }
  }
};

/// Top-down camera: the optical axis is the table's -z axis. Image +u maps
/// to the camera x axis and image +v to the camera -y axis, both rotated by
/// yaw about z.
struct CameraPose {
  double height_above_table = 0.8;
  Point2 planar_offset{};
  double yaw = 0.0;

  void validate() const {
    if (!(height_above_table > 0.0)) throw Error(ErrorCode::DimensionMismatch, "camera height must be positive");
  }
};

/// Row-major depth along the optical axis in meters; 0 marks a missing pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0) {}

  double& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count_if(depth.begin(), depth.end(), [](double d) { return d > 0.0; }));
  }
};

struct PointCloud {
  std::vector<Point3> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Table-frame elevation grid. Cell (i, j) is centred at
/// origin + (i * resolution, j * resolution); i runs along x, j along y.
struct HeightMap {
  double resolution = 0.002;
  Point2 origin{};
  int cols = 0;
  int rows = 0;
  std::vector<double> elevation;
  std::vector<std::uint8_t> valid;  // 1 = observed, 0 = filled or no data

  HeightMap() = default;
  HeightMap(double res, Point2 org, int c, int r)
      : resolution(res), origin(org), cols(c), rows(r),
        elevation(static_cast<std::size_t>(c) * r, 0.0), valid(static_cast<std::size_t>(c) * r, 0) {}

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * cols + i; }
  bool in_bounds(int i, int j) const { return i >= 0 && j >= 0 && i < cols && j < rows; }
  double at(int i, int j) const { return elevation[index(i, j)]; }
  double& at(int i, int j) { return elevation[index(i, j)]; }
  Point2 cell_center(int i, int j) const { return {origin.x + i * resolution, origin.y + j * resolution}; }
  int col_of(double x) const { return static_cast<int>(std::lround((x - origin.x) / resolution)); }
  int row_of(double y) const { return static_cast<int>(std::lround((y - origin.y) / resolution)); }
  bool empty() const { return cols == 0 || rows == 0; }
  double max_elevation() const {
    return elevation.empty() ? 0.0 : *std::max_element(elevation.begin(), elevation.end());
  }
};

/// Binary per-cell mask over a HeightMap grid.
struct CellMask {
  int cols = 0;
  int rows = 0;
  std::vector<std::uint8_t> cells;

  bool at(int i, int j) const { return cells[static_cast<std::size_t>(j) * cols + i] != 0; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
  }
};

inline constexpr double kDefaultTableEpsilon = 0.008;
inline constexpr double kDefaultTopBand = 0.010;
inline constexpr double kDefaultHeightmapResolution = 0.002;
inline constexpr double kMinElevation = -1e-3;

/// Camera-frame ray (x_c, y_c per unit depth) mapped into the table frame.
inline Vec2 pixel_ray_direction(double u, double v, const CameraIntrinsics& k, const CameraPose& pose) {
  const double a = (u - k.cx) / k.fx;
  const double b = (v - k.cy) / k.fy;
  return rotated(Vec2{a, -b}, pose.yaw);
}

inline PointCloud deproject(const DepthImage& image, const CameraIntrinsics& k, const CameraPose& pose) {
  k.validate();
  pose.validate();
  if (image.width != k.width || image.height != k.height ||
      image.depth.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw Error(ErrorCode::DimensionMismatch, "depth image size does not match intrinsics");
  }
  PointCloud cloud;
  cloud.points.reserve(image.valid_count());
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const double d = image.at(u, v);
      if (!(d > 0.0)) continue;
      const Vec2 w = pixel_ray_direction(u, v, k, pose);
      cloud.points.push_back({pose.planar_offset.x + d * w.x, pose.planar_offset.y + d * w.y,
                              pose.height_above_table - d});
    }
  }
  return cloud;
}

/// Distance filtering against the known table plane: keeps z > epsilon.
inline PointCloud remove_table(const PointCloud& cloud, double epsilon = kDefaultTableEpsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::DegenerateInput, "epsilon must be positive");
  PointCloud out;
  for (const auto& p : cloud.points) {
    if (p.z > epsilon) out.points.push_back(p);
  }
  return out;
}

/// (x, y) of every point within @p band of the highest point.
inline std::vector<Point2> extract_top_surface(const PointCloud& cloud, double band = kDefaultTopBand) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyScene, "no points above the table");
  if (!(band > 0.0)) throw Error(ErrorCode::DegenerateInput, "band must be positive");
  double z_max = -std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points) z_max = std::max(z_max, p.z);
  std::vector<Point2> out;
  for (const auto& p : cloud.points) {
    if (p.z >= z_max - band) out.push_back({p.x, p.y});
  }
  return out;
}

namespace detail {

/// Multi-source BFS from valid cells; every invalid cell takes the value of
/// the first valid cell whose wavefront reaches it.
inline void fill_from_nearest_valid(HeightMap& map) {
  std::deque<std::pair<int, int>> frontier;
  std::vector<std::uint8_t> seen(map.valid);
  for (int j = 0; j < map.rows; ++j) {
    for (int i = 0; i < map.cols; ++i) {
      if (map.valid[map.index(i, j)]) frontier.emplace_back(i, j);
    }
  }
  constexpr int di[4] = {1, -1, 0, 0};
  constexpr int dj[4] = {0, 0, 1, -1};
  while (!frontier.empty()) {
    const auto [i, j] = frontier.front();
    frontier.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k];
      const int nj = j + dj[k];
      if (!map.in_bounds(ni, nj) || seen[map.index(ni, nj)]) continue;
      seen[map.index(ni, nj)] = 1;
      map.at(ni, nj) = map.at(i, j);
      frontier.emplace_back(ni, nj);
    }
  }
}

}  // namespace detail

/**
 * Rasterizes onto the grid aligned with multiples of @p resolution that spans
 * the cloud's bounding box. Each cell keeps the highest point falling into
 * it; cells without points are filled from the nearest observed cell and
 * left marked invalid.
 */
inline HeightMap to_heightmap(const PointCloud& cloud, double resolution = kDefaultHeightmapResolution) {
  if (!(resolution > 0.0)) throw Error(ErrorCode::DegenerateInput, "resolution must be positive");
  if (cloud.empty()) return HeightMap(resolution, {}, 0, 0);
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const auto& p : cloud.points) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  const auto i0 = std::llround(lo_x / resolution);
  const auto j0 = std::llround(lo_y / resolution);
  const auto i1 = std::llround(hi_x / resolution);
  const auto j1 = std::llround(hi_y / resolution);
  HeightMap map(resolution, {static_cast<double>(i0) * resolution, static_cast<double>(j0) * resolution},
                static_cast<int>(i1 - i0 + 1), static_cast<int>(j1 - j0 + 1));
  std::fill(map.elevation.begin(), map.elevation.end(), -std::numeric_limits<double>::infinity());
  for (const auto& p : cloud.points) {
    const int i = static_cast<int>(std::llround(p.x / resolution) - i0);
    const int j = static_cast<int>(std::llround(p.y / resolution) - j0);
    const std::size_t idx = map.index(i, j);
    map.elevation[idx] = std::max(map.elevation[idx], std::max(p.z, kMinElevation));
    map.valid[idx] = 1;
  }
  for (std::size_t c = 0; c < map.elevation.size(); ++c) {
    if (!map.valid[c]) map.elevation[c] = 0.0;
  }
  detail::fill_from_nearest_valid(map);
  return map;
}

/// Largest 8-connected component of cells above @p min_height. Ties go to
/// the component found first in row-major order.
inline CellMask segment_largest_object(const HeightMap& map, double min_height = kDefaultTableEpsilon) {
  if (!(min_height > 0.0)) throw Error(ErrorCode::DegenerateInput, "min_height must be positive");
  std::vector<int> label(map.elevation.size(), 0);
  int best_label = 0;
  std::size_t best_size = 0;
  int next_label = 0;
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < map.rows; ++j) {
    for (int i = 0; i < map.cols; ++i) {
      if (label[map.index(i, j)] != 0 || !(map.at(i, j) > min_height)) continue;
      ++next_label;
      std::size_t size = 0;
      stack.assign(1, {i, j});
      label[map.index(i, j)] = next_label;
      while (!stack.empty()) {
        const auto [ci, cj] = stack.back();
        stack.pop_back();
        ++size;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int ni = ci + di, nj = cj + dj;
            if (!map.in_bounds(ni, nj)) continue;
            auto& l = label[map.index(ni, nj)];
            if (l != 0 || !(map.at(ni, nj) > min_height)) continue;
            l = next_label;
            stack.emplace_back(ni, nj);
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next_label;
      }
    }
  }
  if (best_label == 0) throw Error(ErrorCode::EmptyScene, "no cell rises above the table threshold");
  CellMask mask{map.cols, map.rows, std::vector<std::uint8_t>(label.size(), 0)};
  for (std::size_t c = 0; c < label.size(); ++c) mask.cells[c] = label[c] == best_label ? 1 : 0;
  return mask;
}

/// Zeroes every cell outside @p mask (the object becomes the only relief).
inline HeightMap isolate(const HeightMap& map, const CellMask& mask) {
  HeightMap out = map;
  for (std::size_t c = 0; c < out.elevation.size(); ++c) {
    if (!mask.cells[c]) out.elevation[c] = 0.0;
  }
  return out;
}

}  // namespace graspbench
