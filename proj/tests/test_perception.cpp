#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "graspbench/perception.hpp"
#include "graspbench/scene.hpp"
#include "oracles.hpp"

using namespace graspbench;

namespace {

PointCloud cloud_of(std::initializer_list<Point3> pts) { return PointCloud{std::vector<Point3>(pts)}; }

}  // namespace

TEST(Deproject, PrincipalPointAndOffsetPixel) {
  CameraIntrinsics k;
  k.fx = k.fy = 700;
  k.cx = 300;
  k.cy = 200;
  CameraPose pose;
  DepthImage img(k.width, k.height);
  img.at(300, 200) = 0.8;
  img.at(400, 200) = 0.7;
  const auto cloud = deproject(img, k, pose);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_NEAR(cloud.points[0].x, 0.0, 1e-12);
  EXPECT_NEAR(cloud.points[0].y, 0.0, 1e-12);
  EXPECT_NEAR(cloud.points[0].z, 0.0, 1e-12);
  EXPECT_NEAR(cloud.points[1].x, 0.1, 1e-12);
  EXPECT_NEAR(cloud.points[1].y, 0.0, 1e-12);
  EXPECT_NEAR(cloud.points[1].z, 0.1, 1e-12);
}

TEST(Deproject, ImageRowsPointAlongMinusY) {
  CameraIntrinsics k;
  CameraPose pose;
  DepthImage img(k.width, k.height);
  img.at(319, 0) = 0.8;
  const auto cloud = deproject(img, k, pose);
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_GT(cloud.points[0].y, 0.0);
}

TEST(Deproject, SizeMismatchThrows) {
  CameraIntrinsics k;
  DepthImage img(10, 10);
  try {
    deproject(img, k, CameraPose{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(RemoveTable, KeepsStrictlyAboveEpsilon) {
  const auto out = remove_table(cloud_of({{0, 0, 0.0}, {0, 0, 0.005}, {0, 0, 0.008}, {0, 0, 0.009}, {0, 0, 0.2}}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.points[0].z, 0.009);
}

TEST(ExtractTop, StackedBoxesKeepUpperOnly) {
  PointCloud c;
  for (int i = 0; i < 10; ++i) c.points.push_back({0.01 * i, 0.0, 0.05});
  for (int i = 0; i < 4; ++i) c.points.push_back({0.01 * i, 0.01, 0.10});
  const auto top = extract_top_surface(c);
  EXPECT_EQ(top.size(), 4u);
}

TEST(ExtractTop, RampBand) {
  PointCloud c;
  for (int i = 0; i <= 100; ++i) c.points.push_back({0.001 * i, 0.0, 0.02 + 0.0004 * i});
  // z_max = 0.06; the band keeps z >= 0.05, i.e. i >= 75.
  EXPECT_EQ(extract_top_surface(c, 0.010).size(), 26u);
  EXPECT_THROW(extract_top_surface(PointCloud{}), Error);
}

TEST(ToHeightmap, SinglePointAndMaximum) {
  const auto one = to_heightmap(cloud_of({{0.01, 0.02, 0.03}}), 0.002);
  ASSERT_EQ(one.cols, 1);
  ASSERT_EQ(one.rows, 1);
  EXPECT_EQ(one.at(0, 0), 0.03);
  EXPECT_NEAR(one.cell_center(0, 0).x, 0.01, 1e-12);

  const auto two = to_heightmap(cloud_of({{0.0, 0.0, 0.03}, {0.0004, -0.0003, 0.05}, {0.004, 0.0, 0.01}}), 0.002);
  EXPECT_EQ(two.cols, 3);
  EXPECT_EQ(two.at(0, 0), 0.05);
  EXPECT_EQ(two.at(2, 0), 0.01);
  EXPECT_FALSE(two.valid[1]);
  EXPECT_EQ(to_heightmap(PointCloud{}).cols, 0);
}

TEST(ToHeightmap, RenderedBoxFootprintArea) {
  const ObjectModel b{"b", {{rect_footprint(0.1, 0.06), 0.04}}, 0.2, 0.5};
  const SceneSpec scene{{b}, {{"b", 0.02, -0.03, 0.4}}, 0.6};
  const auto img = render_depth(scene, CameraIntrinsics{}, CameraPose{});
  const auto map = to_heightmap(remove_table(deproject(img, CameraIntrinsics{}, CameraPose{})));
  std::size_t n = 0;
  for (std::size_t c = 0; c < map.elevation.size(); ++c) n += map.valid[c] && map.elevation[c] > 0.02;
  const double area = n * map.resolution * map.resolution;
  EXPECT_NEAR(area, 0.1 * 0.06, 0.05 * 0.1 * 0.06);
}

TEST(Segmentation, LargestComponentAndEmpty) {
  HeightMap m(0.002, {0, 0}, 20, 10);
  for (int j = 1; j < 4; ++j)
    for (int i = 1; i < 4; ++i) m.at(i, j) = 0.03;  // 9 cells
  for (int j = 2; j < 8; ++j)
    for (int i = 10; i < 14; ++i) m.at(i, j) = 0.05;  // 24 cells
  m.at(14, 8) = 0.05;                                  // diagonal neighbour joins
  const auto mask = segment_largest_object(m);
  EXPECT_EQ(mask.count(), 25u);
  EXPECT_FALSE(mask.at(2, 2));
  const auto iso = isolate(m, mask);
  EXPECT_EQ(iso.at(2, 2), 0.0);
  EXPECT_EQ(iso.at(11, 3), 0.05);

  HeightMap flat(0.002, {0, 0}, 5, 5);
  try {
    segment_largest_object(flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyScene);
  }
}

TEST(RoundTrip, LibraryObjectsMatchAnalyticHeights) {
  const auto lib = default_object_library();
  const CameraIntrinsics k;
  const CameraPose pose;
  for (std::size_t n = 0; n < lib.size(); ++n) {
    const SceneSpec scene{lib, {{lib[n].id, 0.03, -0.02, 0.5 + 0.3 * n}}, 0.6};
    const auto cloud = deproject(render_depth(scene, k, pose), k, pose);
    const auto map = to_heightmap(cloud, kDefaultHeightmapResolution);
    EXPECT_EQ(oracle::heightmap_mismatches(scene, map, 2, 0.002, 0.002), 0u) << lib[n].id;
  }
}

TEST(RoundTrip, CameraYawAndOffset) {
  const auto lib = default_object_library();
  const CameraIntrinsics k;
  const CameraPose pose{0.7, {0.02, 0.01}, 0.3};
  const SceneSpec scene{lib, {{"mustard", 0.0, 0.0, 1.0}}, 0.6};
  const auto map = to_heightmap(deproject(render_depth(scene, k, pose), k, pose));
  EXPECT_EQ(oracle::heightmap_mismatches(scene, map, 2, 0.002, 0.002), 0u);
}
