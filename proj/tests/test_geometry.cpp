#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "graspbench/geometry.hpp"
#include "oracles.hpp"

using namespace graspbench;

namespace {

Polygon unit_square() { return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// L: [0,2]x[0,1] plus [0,1]x[1,2]
std::vector<Point2> l_shape() { return {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}; }

std::vector<Point2> as_vector(const Polygon& p) { return {p.vertices().begin(), p.vertices().end()}; }

bool is_simple(const Polygon& p) {
  const auto v = p.vertices();
  const std::size_t n = v.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (b == a + 1 || (a == 0 && b == n - 1)) continue;
      if (detail::segments_intersect(v[a], v[(a + 1) % n], v[b], v[(b + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace

TEST(Polygon, RejectsClockwiseAndDegenerate) {
  EXPECT_THROW(Polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), Error);
  EXPECT_THROW(Polygon({{0, 0}, {1, 0}}), Error);
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);  // bow tie
  EXPECT_NO_THROW(unit_square());
}

TEST(Polygon, ContainsAndNormals) {
  const auto sq = unit_square();
  EXPECT_TRUE(sq.contains({0.5, 0.5}));
  EXPECT_FALSE(sq.contains({1.5, 0.5}));
  const Vec2 n = sq.inward_normal(0);
  EXPECT_NEAR(n.x, 0.0, 1e-12);
  EXPECT_NEAR(n.y, 1.0, 1e-12);
}

TEST(ConcaveHull, SquareCornersGiveSquare) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto hull = concave_hull(pts, 2.0);
  ASSERT_EQ(hull.size(), 4u);
  EXPECT_NEAR(oracle::shoelace_area(as_vector(hull)), 1.0, 1e-12);
  for (const auto& p : pts) {
    const auto v = hull.vertices();
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [&](Point2 q) { return distance(p, q) < 1e-12; }));
  }
}

TEST(ConcaveHull, CollinearIsDegenerate) {
  const std::vector<Point2> pts{{0, 0}, {1, 1}, {2, 2}};
  try {
    concave_hull(pts, 1.0);
    FAIL() << "expected DegenerateInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
  }
  EXPECT_THROW(concave_hull(std::vector<Point2>{{0, 0}, {1, 0}}, 1.0), Error);
}

TEST(ConcaveHull, LShapeAreaMatchesDecomposition) {
  // Dense 5 mm grid over an L made of a 0.2 x 0.1 bar and a 0.1 x 0.1 leg.
  std::vector<Point2> pts;
  const double step = 0.005;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double x = i * step, y = j * step;
      if (y <= 0.1 + 1e-12 || x <= 0.1 + 1e-12) pts.push_back({x, y});
    }
  }
  const double l_area = 0.2 * 0.1 + 0.1 * 0.1;
  const auto hull = concave_hull(pts, 0.02);
  EXPECT_TRUE(is_simple(hull));
  EXPECT_NEAR(oracle::shoelace_area(as_vector(hull)), l_area, 0.02 * l_area);
  const auto convex = convex_hull(pts);
  EXPECT_GT(oracle::shoelace_area(as_vector(convex)), 1.1 * l_area);
  std::size_t inside = 0;
  for (const auto& p : pts) inside += hull.contains(p) || hull.distance_to_boundary(p) <= 1e-6;
  EXPECT_GE(inside, static_cast<std::size_t>(0.99 * pts.size()));
}

TEST(ConcaveHull, LargeAlphaIsConvexHull) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> pts;
    for (int k = 0; k < 60; ++k) pts.push_back({u(rng), u(rng)});
    const auto a = as_vector(concave_hull(pts, 1e6));
    const auto b = as_vector(convex_hull(pts));
    ASSERT_EQ(a.size(), b.size());
    for (const auto& p : a) {
      EXPECT_TRUE(std::any_of(b.begin(), b.end(), [&](Point2 q) { return distance(p, q) < 1e-9; }));
    }
  }
}

TEST(ConcaveHull, IndependentOfInputOrder) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 0.1);
  std::vector<Point2> pts;
  for (int k = 0; k < 300; ++k) pts.push_back({u(rng), u(rng)});
  const auto a = as_vector(concave_hull(pts));
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = as_vector(concave_hull(pts));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].x, b[k].x);
    EXPECT_EQ(a[k].y, b[k].y);
  }
}

TEST(ConcaveHull, RandomBlobsSatisfyPolygonInvariants) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Point2> pts;
    const double r0 = 0.03 + 0.03 * u(rng);
    for (int k = 0; k < 400; ++k) {
      const double a = 2 * std::numbers::pi * u(rng);
      const double r = r0 * (0.6 + 0.4 * std::cos(3 * a)) * std::sqrt(u(rng));
      pts.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const auto hull = concave_hull(pts);
    EXPECT_TRUE(is_simple(hull));
    EXPECT_GT(hull.area(), 0.0);
  }
}

TEST(SampleHullNormals, UnitSquareCounts) {
  const auto s = sample_hull_normals(unit_square(), 0.25);
  EXPECT_EQ(s.size(), 16u);
  for (const auto& h : s) {
    if (std::abs(h.point.y) < 1e-12) {
      EXPECT_NEAR(h.normal.x, 0.0, 1e-12);
      EXPECT_NEAR(h.normal.y, 1.0, 1e-12);
    }
  }
  EXPECT_EQ(sample_hull_normals(unit_square(), 10.0).size(), 4u);
  EXPECT_THROW(sample_hull_normals(unit_square(), 0.0), Error);
}

TEST(SampleHullNormals, CircleNormalsPointToCentre) {
  const double r = 0.05;
  std::vector<Point2> v;
  for (int k = 0; k < 360; ++k) {
    const double a = 2 * std::numbers::pi * k / 360;
    v.push_back({r * std::cos(a), r * std::sin(a)});
  }
  const Polygon circle(v);
  const auto samples = sample_hull_normals(circle, r * std::numbers::pi / 180);
  for (const auto& s : samples) {
    const double radial = std::atan2(-s.point.y, -s.point.x);
    const double normal = std::atan2(s.normal.y, s.normal.x);
    EXPECT_LE(std::abs(oracle::wrap_angle(radial - normal)), std::numbers::pi / 180);
  }
}

TEST(SampleHullNormals, StepIntoInteriorAndSpacing) {
  const Polygon l(l_shape());
  const auto samples = sample_hull_normals(l, 0.07);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    EXPECT_NEAR(norm(s.normal), 1.0, 1e-9);
    EXPECT_TRUE(l.contains(s.point + 1e-6 * s.normal));
    const auto& next = samples[(k + 1) % samples.size()];
    const double gap = k + 1 < samples.size() ? next.arc_position - s.arc_position
                                              : l.perimeter() - s.arc_position + next.arc_position;
    EXPECT_LE(gap, 0.07 + 1e-12);
  }
}

TEST(RayCast, SquareExamples) {
  const auto hit = ray_cast(unit_square(), {0.5, 0.0}, {0.0, 1.0});
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->x, 0.5, 1e-12);
  EXPECT_NEAR(hit->y, 1.0, 1e-12);
  EXPECT_FALSE(ray_cast(unit_square(), {0.5, 0.0}, {0.0, -1.0}));
}

TEST(RayCast, LShapeNotchMatchesBruteForce) {
  const auto v = l_shape();
  const Polygon l(v);
  // From the bottom edge under the leg, straight up: exits at y = 2.
  auto hit = ray_cast(l, {0.5, 0.0}, {0.0, 1.0});
  auto ref = oracle::ray_cast(v, {0.5, 0.0}, {0.0, 1.0});
  ASSERT_TRUE(hit && ref);
  EXPECT_NEAR(distance(*hit, ref->point), 0.0, 1e-9);
  // Under the notch, straight up: stops at the notch floor y = 1.
  hit = ray_cast(l, {1.5, 0.0}, {0.0, 1.0});
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->y, 1.0, 1e-12);
}

TEST(RayCast, RandomPolygonsMatchBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // Random star-shaped polygon (simple, CCW).
    const int n = 5 + static_cast<int>(u(rng) * 10);
    std::vector<Point2> v;
    for (int k = 0; k < n; ++k) {
      const double a = 2 * std::numbers::pi * (k + 0.8 * u(rng)) / n;
      const double r = 0.3 + 0.7 * u(rng);
      v.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const Polygon poly(v);
    const std::size_t e = static_cast<std::size_t>(u(rng) * n) % n;
    const auto [a, b] = poly.edge(e);
    const Point2 origin = a + u(rng) * (b - a);
    const double ang = 2 * std::numbers::pi * u(rng);
    const Vec2 dir{std::cos(ang), std::sin(ang)};
    const auto got = ray_cast(poly, origin, dir);
    const auto ref = oracle::ray_cast(v, origin, dir);
    ASSERT_EQ(got.has_value(), ref.has_value()) << "trial " << trial;
    if (got) {
      EXPECT_LE(distance(*got, ref->point), 1e-9) << "trial " << trial;
      ++checked;
    }
  }
  EXPECT_GT(checked, 300);
}

TEST(Centroid, Examples) {
  const auto c = polygon_centroid(unit_square());
  EXPECT_NEAR(c.x, 0.5, 1e-12);
  EXPECT_NEAR(c.y, 0.5, 1e-12);
  const auto t = polygon_centroid(Polygon({{0, 0}, {1, 0}, {0, 1}}));
  EXPECT_NEAR(t.x, 1.0 / 3, 1e-12);
  EXPECT_NEAR(t.y, 1.0 / 3, 1e-12);
}

TEST(Centroid, LShapeDecomposition) {
  // Rectangles [0,2]x[0,1] (area 2, centroid (1, 0.5)) and [0,1]x[1,2] (area 1, centroid (0.5, 1.5)).
  const auto c = polygon_centroid(Polygon(l_shape()));
  EXPECT_NEAR(c.x, (2 * 1.0 + 1 * 0.5) / 3, 1e-12);
  EXPECT_NEAR(c.y, (2 * 0.5 + 1 * 1.5) / 3, 1e-12);
}

TEST(Centroid, RotationOfVertexListAndTranslation) {
  auto v = l_shape();
  const auto c0 = polygon_centroid(Polygon(v));
  std::rotate(v.begin(), v.begin() + 2, v.end());
  const auto c1 = polygon_centroid(Polygon(v));
  EXPECT_NEAR(c0.x, c1.x, 1e-12);
  EXPECT_NEAR(c0.y, c1.y, 1e-12);
  const Vec2 t{123.25, -7.5};
  const auto c2 = polygon_centroid(Polygon(v).translated(t));
  EXPECT_NEAR(c2.x, c0.x + t.x, 1e-12);
  EXPECT_NEAR(c2.y, c0.y + t.y, 1e-12);
  EXPECT_THROW(polygon_centroid(Polygon({{0, 0}, {1e-7, 0}, {0, 1e-7}})), Error);
}
