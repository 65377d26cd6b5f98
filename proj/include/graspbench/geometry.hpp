/**
 * @file geometry.hpp
 * @brief Planar geometry used by the top-surface planner.
 *
 * Points live in the table frame (meters, z=0 is the table plane). Polygons
 * are simple, counter-clockwise and have a single outer boundary.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "graspbench/error.hpp"

namespace graspbench {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

/// Direction vectors share the point representation.
using Vec2 = Point2;

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

inline Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  return {a.x / n, a.y / n};
}

inline Vec2 rotated(Vec2 a, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

inline bool lex_less(Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

inline double point_line_distance(Point2 p, Point2 a, Point2 b) {
  const Vec2 ab = b - a;
  const double len = norm(ab);
  if (len == 0.0) return distance(p, a);
  return std::abs(cross(ab, p - a)) / len;
}

namespace detail {

inline int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({norm(b - a) * norm(c - a), 1e-300});
  if (std::abs(v) <= 1e-14 * scale) return 0;
  return v > 0 ? 1 : -1;
}

inline bool on_segment(Point2 p, Point2 a, Point2 b) {
  return std::min(a.x, b.x) - 1e-15 <= p.x && p.x <= std::max(a.x, b.x) + 1e-15 &&
         std::min(a.y, b.y) - 1e-15 <= p.y && p.y <= std::max(a.y, b.y) + 1e-15;
}

/// True when the closed segments share any point.
inline bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

inline double signed_area(std::span<const Point2> v) {
  if (v.size() < 3) return 0.0;
  const Point2 o = v[0];
  double a = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) a += cross(v[i] - o, v[i + 1] - o);
  return 0.5 * a;
}

}  // namespace detail

/// Simple counter-clockwise polygon. Construction validates the invariants.
class Polygon {
 public:
  explicit Polygon(std::vector<Point2> vertices) : v_(std::move(vertices)) { validate(); }

  std::span<const Point2> vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  const Point2& operator[](std::size_t i) const { return v_[i]; }
  const Point2& vertex(std::size_t i) const { return v_[i % v_.size()]; }

  /// Edge i runs from vertex i to vertex i+1.
  std::pair<Point2, Point2> edge(std::size_t i) const { return {vertex(i), vertex(i + 1)}; }

  /// Unit normal of edge i pointing into the interior.
  Vec2 inward_normal(std::size_t i) const {
    const auto [a, b] = edge(i);
    const Vec2 d = normalized(b - a);
    return {-d.y, d.x};
  }

  double area() const { return detail::signed_area(v_); }

  double perimeter() const {
    double p = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) p += distance(vertex(i), vertex(i + 1));
    return p;
  }

  Polygon translated(Vec2 t) const {
    std::vector<Point2> out(v_);
    for (auto& p : out) p = p + t;
    return Polygon(std::move(out));
  }

  /// Rotation about the origin followed by translation.
  Polygon transformed(double yaw, Vec2 t) const {
    std::vector<Point2> out(v_);
    for (auto& p : out) p = rotated(p, yaw) + t;
    return Polygon(std::move(out));
  }

  /// Crossing-number containment; boundary points may fall either way.
  bool contains(Point2 p) const {
    bool inside = false;
    const std::size_t n = v_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2 a = v_[i];
      const Point2 b = v_[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) inside = !inside;
      }
    }
    return inside;
  }

  double distance_to_boundary(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_.size(); ++i) {
      best = std::min(best, point_segment_distance(p, vertex(i), vertex(i + 1)));
    }
    return best;
  }

 private:
  void validate() const {
    if (v_.size() < 3) throw Error(ErrorCode::DegenerateInput, "polygon needs at least 3 vertices");
    for (const auto& p : v_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw Error(ErrorCode::DegenerateInput, "polygon vertex is not finite");
      }
    }
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (distance(vertex(i), vertex(i + 1)) <= 1e-9) {
        throw Error(ErrorCode::DegenerateInput, "polygon has repeated consecutive vertices");
      }
    }
    if (area() <= 0.0) throw Error(ErrorCode::DegenerateInput, "polygon is not counter-clockwise");
    // Non-adjacent edges must not touch.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (detail::segments_intersect(vertex(i), vertex(i + 1), vertex(j), vertex(j + 1))) {
          throw Error(ErrorCode::DegenerateInput, "polygon is not simple");
        }
      }
    }
  }

  std::vector<Point2> v_;
};

struct HullSample {
  Point2 point;
  Vec2 normal;  // unit, into the interior
  double arc_position = 0.0;
  std::size_t edge = 0;
};

namespace detail {

/// Uniform bucket grid for nearest-neighbour queries on planar point sets.
class PointGrid {
 public:
  PointGrid(std::span<const Point2> pts, double cell) : pts_(pts), cell_(cell) {
    min_ = pts.empty() ? Point2{} : pts[0];
    for (const auto& p : pts) {
      min_.x = std::min(min_.x, p.x);
      min_.y = std::min(min_.y, p.y);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) buckets_[key(cell_of(pts[i]))].push_back(i);
  }

  /// Distance from point i to its nearest other point.
  double nearest_distance(std::size_t i) const {
    const auto [cx, cy] = cell_of(pts_[i]);
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t r = 0;; ++r) {
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        for (std::int64_t dy = -r; dy <= r; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
          auto it = buckets_.find(key({cx + dx, cy + dy}));
          if (it == buckets_.end()) continue;
          for (std::size_t j : it->second) {
            if (j != i) best = std::min(best, distance(pts_[i], pts_[j]));
          }
        }
      }
      // Everything outside ring r is at least r*cell away.
      if (best <= static_cast<double>(r) * cell_) return best;
      if (r > 4096) return best;
    }
  }

 private:
  std::pair<std::int64_t, std::int64_t> cell_of(Point2 p) const {
    return {static_cast<std::int64_t>(std::floor((p.x - min_.x) / cell_)),
            static_cast<std::int64_t>(std::floor((p.y - min_.y) / cell_))};
  }
  static std::uint64_t key(std::pair<std::int64_t, std::int64_t> c) {
    return (static_cast<std::uint64_t>(c.first) << 32) ^ static_cast<std::uint64_t>(c.second & 0xffffffff);
  }

  std::span<const Point2> pts_;
  double cell_;
  Point2 min_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

/// Sorted, de-duplicated copy of the input. Throws on non-finite input.
inline std::vector<Point2> canonical_points(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::DegenerateInput, "point set contains non-finite coordinates");
    }
  }
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// Andrew's monotone chain on lexicographically sorted points; returns
/// indices of strict hull vertices (collinear points dropped), CCW from the
/// lexicographically smallest point.
inline std::vector<std::size_t> convex_hull_indices(std::span<const Point2> sorted) {
  const std::size_t n = sorted.size();
  std::vector<std::size_t> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(sorted[h[k - 1]] - sorted[h[k - 2]], sorted[i] - sorted[h[k - 2]]) <= 0) --k;
    h[k++] = i;
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(sorted[h[k - 1]] - sorted[h[k - 2]], sorted[i] - sorted[h[k - 2]]) <= 0) --k;
    h[k++] = i;
  }
  h.resize(k > 0 ? k - 1 : 0);
  return h;
}

/// Drops vertices that are (numerically) collinear with their neighbours or
/// coincide with the previous vertex, then rotates the list so it starts at
/// the lexicographically smallest vertex.
inline std::vector<Point2> clean_ring(std::vector<Point2> ring) {
  bool changed = true;
  while (changed && ring.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < ring.size() && ring.size() > 3; ++i) {
      const Point2 prev = ring[(i + ring.size() - 1) % ring.size()];
      const Point2 cur = ring[i];
      const Point2 next = ring[(i + 1) % ring.size()];
      const double la = distance(prev, cur);
      const double lb = distance(cur, next);
      const bool duplicate = la <= 1e-9;
      const bool collinear = std::abs(cross(cur - prev, next - cur)) <= 1e-9 * la * lb &&
                             dot(cur - prev, next - cur) > 0;
      if (duplicate || collinear) {
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  auto first = std::min_element(ring.begin(), ring.end(), lex_less);
  std::rotate(ring.begin(), first, ring.end());
  return ring;
}

}  // namespace detail

/// Convex hull with collinear boundary points removed.
inline Polygon convex_hull(std::span<const Point2> points) {
  const auto pts = detail::canonical_points(points);
  if (pts.size() < 3) throw Error(ErrorCode::DegenerateInput, "fewer than 3 distinct points");
  const auto idx = detail::convex_hull_indices(pts);
  if (idx.size() < 3) throw Error(ErrorCode::DegenerateInput, "points are collinear");
  std::vector<Point2> ring;
  ring.reserve(idx.size());
  for (auto i : idx) ring.push_back(pts[i]);
  return Polygon(detail::clean_ring(std::move(ring)));
}

/// Median distance from each point to its nearest neighbour.
inline double median_nearest_neighbor_spacing(std::span<const Point2> points) {
  const auto pts = detail::canonical_points(points);
  if (pts.size() < 2) throw Error(ErrorCode::DegenerateInput, "need at least 2 distinct points");
  Point2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1e-9});
  const double area = std::max((hi.x - lo.x) * (hi.y - lo.y), extent * extent * 1e-3);
  const double cell = std::max(std::sqrt(area / static_cast<double>(pts.size())), 1e-9);
  detail::PointGrid grid(pts, cell);
  std::vector<double> d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d[i] = grid.nearest_distance(i);
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

inline double default_concave_alpha(std::span<const Point2> points) {
  return 3.0 * median_nearest_neighbor_spacing(points);
}

/**
 * @brief Concave hull by edge digging.
 *
 * Starts from the convex hull and repeatedly replaces a boundary edge longer
 * than @p alpha by two edges through the nearest interior point, provided the
 * new edges are shorter than the old one, do not cross the current boundary
 * and do not cut any remaining point out of the polygon. Input is sorted
 * lexicographically first so the result does not depend on point order.
 */
inline Polygon concave_hull(std::span<const Point2> points, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::DegenerateInput, "alpha must be positive");
  const auto pts = detail::canonical_points(points);
  if (pts.size() < 3) throw Error(ErrorCode::DegenerateInput, "fewer than 3 distinct points");
  const auto hull_idx = detail::convex_hull_indices(pts);
  if (hull_idx.size() < 3) throw Error(ErrorCode::DegenerateInput, "points are collinear");

  const std::size_t n = pts.size();
  std::vector<bool> used(n, false);
  // Ring stored as a doubly linked list over point indices.
  std::vector<std::size_t> next(n, n), prev(n, n);
  for (std::size_t k = 0; k < hull_idx.size(); ++k) {
    const std::size_t a = hull_idx[k];
    const std::size_t b = hull_idx[(k + 1) % hull_idx.size()];
    next[a] = b;
    prev[b] = a;
    used[a] = true;
  }

  // True if segment (s, t) meets ring edge (u, v) anywhere other than a
  // shared endpoint.
  auto meets = [&](std::size_t s, std::size_t t, std::size_t u, std::size_t v) {
    const bool shares = s == u || s == v || t == u || t == v;
    if (!shares) return detail::segments_intersect(pts[s], pts[t], pts[u], pts[v]);
    const std::size_t common = (s == u || s == v) ? s : t;
    const std::size_t mine = common == s ? t : s;
    const std::size_t theirs = common == u ? v : u;
    if (mine == theirs) return true;
    return detail::orientation(pts[s], pts[t], pts[theirs]) == 0 &&
           (detail::on_segment(pts[theirs], pts[s], pts[t]) || detail::on_segment(pts[mine], pts[u], pts[v]));
  };

  auto crosses_boundary = [&](std::size_t a, std::size_t p, std::size_t b) {
    for (std::size_t u = b; u != a; u = next[u]) {
      const std::size_t v = next[u];
      if (meets(a, p, u, v) || meets(p, b, u, v)) return true;
    }
    return false;
  };

  auto strictly_inside_triangle = [&](Point2 q, Point2 a, Point2 p, Point2 b) {
    return detail::orientation(a, p, q) > 0 && detail::orientation(p, b, q) > 0 &&
           detail::orientation(b, a, q) > 0;
  };

  std::vector<std::size_t> queue(hull_idx.begin(), hull_idx.end());
  std::vector<std::pair<double, std::size_t>> candidates;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::size_t a = queue[qi];
    const std::size_t b = next[a];
    const double len = distance(pts[a], pts[b]);
    if (len <= alpha) continue;

    candidates.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      // Interior side of a CCW edge is its left.
      if (cross(pts[b] - pts[a], pts[i] - pts[a]) < 0) continue;
      candidates.emplace_back(point_segment_distance(pts[i], pts[a], pts[b]), i);
    }
    const std::size_t keep = std::min<std::size_t>(candidates.size(), 8);
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end());

    for (std::size_t c = 0; c < keep; ++c) {
      const std::size_t p = candidates[c].second;
      const double lap = distance(pts[a], pts[p]);
      const double lpb = distance(pts[p], pts[b]);
      if (lap <= 1e-9 || lpb <= 1e-9) continue;
      if (std::max(lap, lpb) >= len) continue;
      // The point must belong to this edge rather than to a neighbouring one.
      const double d_here = candidates[c].first;
      if (point_segment_distance(pts[p], pts[prev[a]], pts[a]) < d_here) continue;
      if (point_segment_distance(pts[p], pts[b], pts[next[b]]) < d_here) continue;
      if (crosses_boundary(a, p, b)) continue;
      bool cuts_off = false;
      for (std::size_t i = 0; i < n && !cuts_off; ++i) {
        if (used[i] || i == p) continue;
        cuts_off = strictly_inside_triangle(pts[i], pts[a], pts[p], pts[b]);
      }
      if (cuts_off) continue;

      used[p] = true;
      next[a] = p;
      prev[p] = a;
      next[p] = b;
      prev[b] = p;
      queue.push_back(a);
      queue.push_back(p);
      break;
    }
  }

  std::vector<Point2> ring;
  const std::size_t start = hull_idx[0];
  std::size_t u = start;
  do {
    ring.push_back(pts[u]);
    u = next[u];
  } while (u != start);
  return Polygon(detail::clean_ring(std::move(ring)));
}

inline Polygon concave_hull(std::span<const Point2> points) {
  return concave_hull(points, default_concave_alpha(points));
}

/**
 * Samples every edge independently at ceil(length / spacing) evenly spaced
 * points (midpoints of equal sub-segments), so each edge gets at least one
 * sample and consecutive samples are never more than @p spacing apart.
 */
inline std::vector<HullSample> sample_hull_normals(const Polygon& hull, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::DegenerateInput, "spacing must be positive");
  std::vector<HullSample> out;
  double arc = 0.0;
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const auto [a, b] = hull.edge(e);
    const double len = distance(a, b);
    const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing - 1e-9)));
    const Vec2 normal = hull.inward_normal(e);
    for (std::size_t k = 0; k < count; ++k) {
      const double f = (static_cast<double>(k) + 0.5) / static_cast<double>(count);
      out.push_back({a + f * (b - a), normal, arc + f * len, e});
    }
    arc += len;
  }
  return out;
}

struct RayHit {
  Point2 point;
  std::size_t edge = 0;
  double t = 0.0;
};

/// First boundary crossing strictly beyond the origin (t > 1e-6), with the
/// edge it lies on. Ties between edges go to the lower edge index.
inline std::optional<RayHit> ray_cast_hit(const Polygon& hull, Point2 origin, Vec2 direction) {
  std::optional<RayHit> best;
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const auto [a, b] = hull.edge(e);
    const Vec2 s = b - a;
    const double denom = cross(direction, s);
    if (std::abs(denom) <= 1e-15 * norm(s)) continue;
    const Vec2 ao = a - origin;
    const double t = cross(ao, s) / denom;
    const double u = cross(ao, direction) / denom;
    if (t <= 1e-6 || u < -1e-12 || u > 1.0 + 1e-12) continue;
    if (!best || t < best->t) {
      best = RayHit{a + std::clamp(u, 0.0, 1.0) * s, e, t};
    }
  }
  return best;
}

inline std::optional<Point2> ray_cast(const Polygon& hull, Point2 origin, Vec2 direction) {
  if (auto hit = ray_cast_hit(hull, origin, direction)) return hit->point;
  return std::nullopt;
}

/// Area centroid (shoelace), computed relative to the first vertex.
inline Point2 polygon_centroid(const Polygon& hull) {
  const auto v = hull.vertices();
  const Point2 o = v[0];
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 p = v[i] - o;
    const Point2 q = v[(i + 1) % v.size()] - o;
    const double c = cross(p, q);
    a2 += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(a2) * 0.5 < 1e-12) throw Error(ErrorCode::DegenerateInput, "polygon area too small");
  return {o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)};
}

}  // namespace graspbench
