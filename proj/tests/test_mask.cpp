#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "graspbench/mask.hpp"
#include "graspbench/scene.hpp"
#include "oracles.hpp"

using namespace graspbench;

namespace {

constexpr double kStep = std::numbers::pi / 18;

HeightMap blank(int n, double res) {
  HeightMap m(res, {-(n / 2) * res, -(n / 2) * res}, n, n);
  std::fill(m.valid.begin(), m.valid.end(), std::uint8_t{1});
  return m;
}

void fill_rect(HeightMap& m, double x0, double x1, double y0, double y1, double h) {
  for (int j = 0; j < m.rows; ++j)
    for (int i = 0; i < m.cols; ++i) {
      const auto c = m.cell_center(i, j);
      if (c.x >= x0 - 1e-12 && c.x <= x1 + 1e-12 && c.y >= y0 - 1e-12 && c.y <= y1 + 1e-12) m.at(i, j) = h;
    }
}

MaskParams bare() {
  MaskParams p;
  p.symmetry_weight = 0;
  p.centering_weight = 0;
  return p;
}

double axis_error(double a, double b) {
  const double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

}  // namespace

TEST(GenerateMasks, Counts) {
  GripperModel g;
  const auto two = generate_masks(g, std::numbers::pi / 2, 1);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].rotation, 0.0);
  EXPECT_NEAR(two[1].rotation, std::numbers::pi / 2, 1e-15);
  EXPECT_EQ(generate_masks(g, kStep, 5).size(), 90u);
  for (const auto& t : generate_masks(g, kStep, 1)) EXPECT_EQ(t.opening, g.max_opening);
  const auto five = generate_masks(g, kStep, 5);
  EXPECT_EQ(five[0].opening, g.min_opening);
  EXPECT_EQ(five[4].opening, g.max_opening);
  EXPECT_THROW(generate_masks(g, 0.0, 5), Error);
  EXPECT_THROW(generate_masks(g, kStep, 0), Error);
}

TEST(MaskScore, BoxSpanningGap) {
  auto m = blank(101, 0.002);
  fill_rect(m, -0.03, 0.03, -0.05, 0.05, 0.05);
  GripperModel g;
  const MaskTemplate t{0.06, 0.0};
  const Cell c{50, 50};
  const auto s = mask_score(m, t, c, g, bare());
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, 0.05, 1e-12);
  // Symmetric and centred: the penalties vanish.
  EXPECT_NEAR(*mask_score(m, t, c, g), 0.05, 1e-12);
}

TEST(MaskScore, ObjectUnderFingerIsInvalid) {
  auto m = blank(101, 0.002);
  fill_rect(m, -0.05, 0.05, -0.05, 0.05, 0.05);
  EXPECT_FALSE(mask_score(m, MaskTemplate{0.06, 0.0}, Cell{50, 50}, GripperModel{}, bare()).has_value());
  EXPECT_FALSE(mask_score(m, MaskTemplate{0.06, 0.0}, Cell{2, 50}, GripperModel{}, bare()).has_value());
}

TEST(MaskScore, NarrowBoxMatchesRegionSum) {
  auto m = blank(101, 0.002);
  fill_rect(m, -0.02, 0.02, -0.05, 0.05, 0.05);
  GripperModel g;
  const auto t = oracle::build_template(0.0, 0.05, g, 0.002);
  double sum = 0;
  for (auto [di, dj] : t.gap) sum += m.at(50 + di, 50 + dj);
  const auto s = mask_score(m, MaskTemplate{0.05, 0.0}, Cell{50, 50}, g, bare());
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, sum / t.gap.size(), 1e-12);
  EXPECT_NEAR(*s, 0.05 * 21.0 / 25.0, 1e-12);  // 21 of 25 gap columns covered
}

TEST(MaskSynth, EmptyTableHasNoGrasp) {
  try {
    synthesize_mask(blank(61, 0.002), GripperModel{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoFeasibleGrasp);
  }
  try {
    plan_mask(PointCloud{}, GripperModel{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoFeasibleGrasp);
  }
}

TEST(MaskSynth, SingleBoxCentredOnShortAxis) {
  auto m = blank(121, 0.002);
  fill_rect(m, -0.025, 0.025, -0.06, 0.06, 0.05);
  const auto best = synthesize_mask(m, GripperModel{}).front();
  EXPECT_LE(std::abs(best.x), 2 * m.resolution + 1e-12);
  EXPECT_LE(std::abs(best.y), 2 * m.resolution + 1e-12);
  EXPECT_LE(axis_error(best.theta, 0.0), kStep + 1e-12);
  EXPECT_TRUE(grasp_violation(best, GripperModel{}).empty());
}

TEST(MaskSynth, TwoBoxesPicksTallerAndMatchesBruteForce) {
  auto m = blank(81, 0.003);
  fill_rect(m, -0.09, -0.066, -0.03, 0.03, 0.05);
  fill_rect(m, 0.05, 0.074, -0.03, 0.03, 0.08);
  GripperModel g;
  MaskParams p;
  p.opening_count = 3;
  const auto best = synthesize_mask(m, g, p).front();
  EXPECT_GT(best.x, 0.03);
  const auto want = oracle::brute_force_mask(m, g, p.rotation_step, p.opening_count, p.symmetry_weight,
                                             p.centering_weight);
  ASSERT_TRUE(want.found);
  EXPECT_EQ(m.col_of(best.x), want.i);
  EXPECT_EQ(m.row_of(best.y), want.j);
  EXPECT_EQ(best.theta, want.rotation);
  EXPECT_EQ(best.width, want.opening);
}

TEST(MaskSynth, RandomMapsMatchBruteForce) {
  std::mt19937_64 rng(2024);
  GripperModel g;
  MaskParams p;
  p.opening_count = 3;
  for (int t = 0; t < 20; ++t) {
    const auto m = oracle::random_block_map(rng, 60, 60, 0.003);
    const auto want = oracle::brute_force_mask(m, g, p.rotation_step, p.opening_count, p.symmetry_weight,
                                               p.centering_weight);
    if (!want.found) {
      EXPECT_THROW(synthesize_mask(m, g, p), Error) << t;
      continue;
    }
    const auto best = synthesize_mask(m, g, p).front();
    EXPECT_EQ(m.col_of(best.x), want.i) << t;
    EXPECT_EQ(m.row_of(best.y), want.j) << t;
    EXPECT_EQ(best.theta, want.rotation) << t;
    EXPECT_EQ(best.width, want.opening) << t;
    EXPECT_NEAR(best.quality, want.score / m.max_elevation(), 1e-12) << t;
  }
}

TEST(MaskSynth, TranslationShiftsArgmax) {
  std::mt19937_64 rng(8);
  GripperModel g;
  MaskParams p;
  p.opening_count = 2;
  for (int t = 0; t < 3; ++t) {
    const auto src = oracle::random_block_map(rng, 50, 50, 0.003);
    HeightMap a(0.003, {0, 0}, 70, 70), b(0.003, {0, 0}, 70, 70);
    std::fill(a.valid.begin(), a.valid.end(), std::uint8_t{1});
    std::fill(b.valid.begin(), b.valid.end(), std::uint8_t{1});
    for (int j = 0; j < 50; ++j)
      for (int i = 0; i < 50; ++i) {
        a.at(i + 5, j + 5) = src.at(i, j);
        b.at(i + 8, j + 9) = src.at(i, j);
      }
    const auto ga = synthesize_mask(a, g, p).front();
    const auto gb = synthesize_mask(b, g, p).front();
    EXPECT_EQ(b.col_of(gb.x), a.col_of(ga.x) + 3);
    EXPECT_EQ(b.row_of(gb.y), a.row_of(ga.y) + 4);
    EXPECT_EQ(ga.theta, gb.theta);
    EXPECT_NEAR(ga.quality, gb.quality, 1e-9);
  }
}

TEST(MaskSynth, RotatingSceneByOneStepRotatesBest) {
  // An asymmetric two-tier object keeps the best rotation unique.
  const ObjectModel clamp{"c", {{rect_footprint(0.10, 0.035), 0.03}, {rect_footprint(0.03, 0.035, 0.03, 0.0), 0.02}},
                          0.1, 0.5};
  GripperModel g;
  for (double yaw : {0.2, 0.9}) {
    const auto ma = render_heightmap(SceneSpec{{clamp}, {{"c", 0, 0, yaw}}, 0.3}, 0.002);
    const auto mb = render_heightmap(SceneSpec{{clamp}, {{"c", 0, 0, yaw + kStep}}, 0.3}, 0.002);
    const auto a = synthesize_mask(ma, g).front();
    const auto b = synthesize_mask(mb, g).front();
    EXPECT_LT(axis_error(b.theta, a.theta + kStep), 1e-9) << yaw;
    EXPECT_LE(std::abs(b.quality - a.quality), 0.1 * std::abs(a.quality)) << yaw;
  }
}

TEST(MaskSynth, StrideSkipsCells) {
  auto m = blank(61, 0.002);
  fill_rect(m, -0.02, 0.02, -0.04, 0.04, 0.05);
  MaskParams p;
  p.stride = 2;
  const auto field = compute_score_field(m, GripperModel{}, p);
  for (int j = 0; j < m.rows; ++j)
    for (int i = 0; i < m.cols; ++i)
      if (i % 2 || j % 2) {
        EXPECT_FALSE(field.valid[field.index(i, j)]);
      }
  EXPECT_GT(field.valid_count(), 0u);
}

TEST(MaskSynth, RuntimeLinearInTemplateCount) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_block_map(rng, 80, 80, 0.003);
  GripperModel g;
  // Halving the rotation step doubles the template count with the same kernels.
  MaskParams coarse, fine;
  coarse.opening_count = fine.opening_count = 2;
  fine.rotation_step = coarse.rotation_step / 2;
  auto run = [&](const MaskParams& p) {
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      compute_score_field(m, g, p);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  const double ratio = run(fine) / run(coarse);
  EXPECT_NEAR(ratio, 2.0, 0.6);
}
