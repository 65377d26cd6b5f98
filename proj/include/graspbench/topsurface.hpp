/**
 * @file topsurface.hpp
 * @brief Top-surface planner: concave hull of the object's top surface,
 * dense hull-normal sampling, opposite-contact ray casts and force/moment
 * balance scoring.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "graspbench/error.hpp"
#include "graspbench/geometry.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/perception.hpp"

namespace graspbench {

struct GraspCandidate {
  GraspPose grasp;
  Point2 contact_a;
  Point2 contact_b;
  Vec2 normal_a;
  Vec2 normal_b;
  double force_score = 0.0;
  double moment_score = 0.0;
};

struct QualityWeights {
  double force = 0.5;
  double moment = 0.5;
};

struct TopSurfaceParams {
  double spacing = 0.002;
  std::optional<double> alpha;  // concave hull edge limit; default from point density
  QualityWeights weights;
  double approach_margin = 0.005;  // extra jaw opening while descending, used for the depth
};

struct QualityTerms {
  double force = 0.0;
  double moment = 0.0;
  double quality = 0.0;
};

/// Force term: antipodality of the inward normals. Moment term: offset of the
/// contact line from the reference centroid, relative to region_radius.
inline QualityTerms grasp_quality_terms(Point2 contact_a, Vec2 normal_a, Point2 contact_b, Vec2 normal_b,
                                        Point2 centroid, double region_radius, QualityWeights w = {}) {
  QualityTerms t;
  t.force = std::clamp(-dot(normal_a, normal_b), -1.0, 1.0);
  t.moment = std::clamp(point_line_distance(centroid, contact_a, contact_b) / region_radius, 0.0, 1.0);
  t.quality = w.force * t.force - w.moment * t.moment;
  return t;
}

inline double grasp_quality(Point2 contact_a, Vec2 normal_a, Point2 contact_b, Vec2 normal_b, Point2 centroid,
                            double region_radius, QualityWeights w = {}) {
  return grasp_quality_terms(contact_a, normal_a, contact_b, normal_b, centroid, region_radius, w).quality;
}

/// Largest distance from the centroid to a hull vertex.
inline double region_radius(const Polygon& hull, Point2 centroid) {
  double r = 0.0;
  for (const auto& v : hull.vertices()) r = std::max(r, distance(v, centroid));
  return r;
}

inline bool candidate_rank_less(const GraspCandidate& a, const GraspCandidate& b) {
  return grasp_rank_less(a.grasp, b.grasp);
}

/// Builds the candidate for a single contact pair; the grasp sits at the
/// contact midpoint with the axis along the contact line. Depth is left at 0.
inline GraspCandidate make_candidate(Point2 a, Vec2 na, Point2 b, Vec2 nb, Point2 centroid, double radius,
                                     QualityWeights w) {
  const auto terms = grasp_quality_terms(a, na, b, nb, centroid, radius, w);
  GraspCandidate c;
  c.contact_a = a;
  c.contact_b = b;
  c.normal_a = na;
  c.normal_b = nb;
  c.force_score = terms.force;
  c.moment_score = terms.moment;
  const Vec2 d = b - a;
  c.grasp.x = 0.5 * (a.x + b.x);
  c.grasp.y = 0.5 * (a.y + b.y);
  c.grasp.theta = canonical_theta(std::atan2(d.y, d.x));
  c.grasp.width = norm(d);
  c.grasp.quality = terms.quality;
  return c;
}

/**
 * Candidates for a given hull, one per hull sample whose inward ray finds an
 * opposite contact at a distance inside the gripper's opening range. When
 * @p heights is given, each candidate's fingertip depth is computed from it,
 * with the jaws opened @p approach_margin beyond the contact span, and
 * candidates whose footprint leaves the map are dropped.
 */
inline std::vector<GraspCandidate> hull_grasp_candidates(const Polygon& hull, const HeightMap* heights,
                                                         const GripperModel& gripper, double spacing,
                                                         QualityWeights weights = {},
                                                         double approach_margin = 0.0) {
  const Point2 centroid = polygon_centroid(hull);
  const double radius = region_radius(hull, centroid);
  std::vector<GraspCandidate> out;
  for (const auto& s : sample_hull_normals(hull, spacing)) {
    const auto hit = ray_cast_hit(hull, s.point, s.normal);
    if (!hit) continue;
    const double width = distance(s.point, hit->point);
    if (width < gripper.min_opening || width > gripper.max_opening) continue;
    auto c = make_candidate(s.point, s.normal, hit->point, hull.inward_normal(hit->edge), centroid, radius, weights);
    if (heights != nullptr) {
      try {
        const double opening = std::min(c.grasp.width + approach_margin, gripper.max_opening);
        c.grasp.z = compute_grasp_depth(*heights, c.grasp.x, c.grasp.y, c.grasp.theta, opening, gripper);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfBounds) throw;
        continue;
      }
    }
    out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(), candidate_rank_less);
  return out;
}

inline std::vector<GraspCandidate> synthesize_top_surface(std::span<const Point2> top_surface,
                                                          const HeightMap& heights, const GripperModel& gripper,
                                                          const TopSurfaceParams& params = {}) {
  gripper.validate();
  const Polygon hull = params.alpha ? concave_hull(top_surface, *params.alpha) : concave_hull(top_surface);
  auto out = hull_grasp_candidates(hull, &heights, gripper, params.spacing, params.weights, params.approach_margin);
  if (out.empty()) throw Error(ErrorCode::NoFeasibleGrasp, "no contact pair fits the gripper opening range");
  return out;
}

/// Top-surface planner from a table-frame cloud: table removal, top band,
/// heightmap for fingertip depth, then synthesize_top_surface.
struct TopSurfacePipelineParams {
  double table_epsilon = kDefaultTableEpsilon;
  double top_band = kDefaultTopBand;
  double resolution = kDefaultHeightmapResolution;
  TopSurfaceParams search;
};

inline std::vector<GraspCandidate> plan_top_surface(const PointCloud& cloud, const GripperModel& gripper,
                                                    const TopSurfacePipelineParams& params = {}) {
  const auto above = remove_table(cloud, params.table_epsilon);
  const auto top = extract_top_surface(above, params.top_band);
  const auto heights = to_heightmap(cloud, params.resolution);
  return synthesize_top_surface(top, heights, gripper, params.search);
}

}  // namespace graspbench
