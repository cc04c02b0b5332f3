#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "curb/bev.hpp"
#include "curb/errors.hpp"
#include "support/oracles.hpp"

namespace curb {
namespace {

using testing::random_mask;
using testing::small_grid;

std::size_t nonzero_cells(const BevImage& img) {
  std::size_t n = 0;
  const std::size_t px = img.grid.pixels();
  for (std::size_t i = 0; i < px; ++i) {
    bool any = false;
    for (int ch = 0; ch < BevImage::kChannels; ++ch) any |= img.data[ch * px + i] != 0.0f;
    n += any ? 1 : 0;
  }
  return n;
}

TEST(GridSpec, DefaultsSpanTheTrimmedArea) {
  const GridSpec g;
  EXPECT_EQ(g.width, 480);
  EXPECT_EQ(g.height, 960);
  EXPECT_DOUBLE_EQ(g.x_min(), -24.0);
  EXPECT_DOUBLE_EQ(g.z_max(), 48.0);
}

TEST(GridSpec, MetreRoundTripWithinHalfCell) {
  const GridSpec g;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(-23.99, 23.99), uz(-47.99, 47.99);
  for (int i = 0; i < 1000; ++i) {
    const double x = ux(rng), z = uz(rng);
    EXPECT_LE(std::abs(g.x_of(g.col_of(x)) - x), 0.5 * g.resolution + 1e-12);
    EXPECT_LE(std::abs(g.z_of(g.row_of(z)) - z), 0.5 * g.resolution + 1e-12);
  }
}

TEST(RasterizeCloud, EmptyCloudIsZero) {
  const BevImage img = rasterize_cloud(LidarScan{}, GridSpec{});
  EXPECT_EQ(nonzero_cells(img), 0u);
}

TEST(RasterizeCloud, SinglePointIndex) {
  const GridSpec g;
  LidarScan s;
  s.points.push_back({1.05f, -1.0f, 2.03f, 0.4f});
  const BevImage img = rasterize_cloud(s, g);
  EXPECT_EQ(nonzero_cells(img), 1u);
  const int col = static_cast<int>(std::floor((1.05 + 24.0) / 0.1));
  const int row = static_cast<int>(std::floor((48.0 - 2.03) / 0.1));
  EXPECT_EQ(col, 250);
  EXPECT_EQ(row, 459);
  EXPECT_FLOAT_EQ(img.at(1, row, col), 0.4f);
  EXPECT_NEAR(img.at(0, row, col) * img.range_scale, std::hypot(1.05, 2.03), 1e-5);
  EXPECT_NEAR(img.at(2, row, col) * img.height_scale - img.height_floor, -1.0, 1e-5);
}

TEST(RasterizeCloud, HighestPointWins) {
  LidarScan s;
  s.points.push_back({0.01f, -1.0f, 0.01f, 0.2f});
  s.points.push_back({0.02f, -0.5f, 0.02f, 0.9f});
  s.points.push_back({0.03f, -0.7f, 0.03f, 0.5f});
  const BevImage img = rasterize_cloud(s, GridSpec{});
  const GridSpec g;
  EXPECT_FLOAT_EQ(img.at(1, g.row_of(0.02), g.col_of(0.02)), 0.9f);
}

TEST(RasterizeCloud, OutOfGridPointsDropped) {
  LidarScan s;
  s.points.push_back({30.0f, -1.0f, 0.0f, 0.5f});
  s.points.push_back({0.0f, -1.0f, -49.0f, 0.5f});
  EXPECT_EQ(nonzero_cells(rasterize_cloud(s, GridSpec{})), 0u);
}

TEST(RasterizeCloud, NormalizedChannelsInUnitRange) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<float> ux(-24, 24), uz(-48, 48), uy(-3.55f, 0.0f), ui(0, 1);
  LidarScan s;
  for (int i = 0; i < 20000; ++i) s.points.push_back({ux(rng), uy(rng), uz(rng), ui(rng)});
  const BevImage img = rasterize_cloud(s, GridSpec{});
  for (float v : img.data) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(RasterizePolylines, EmptyListIsZero) {
  EXPECT_EQ(count_on(rasterize_polylines({}, GridSpec{}, 1)), 0u);
}

TEST(RasterizePolylines, FiveMetreSegment) {
  const std::vector<Polyline> lines = {{{1.0, 0.0}, {1.0, 5.0}}};
  const CurbMask m = rasterize_polylines(lines, GridSpec{}, 1);
  const auto n = static_cast<long>(count_on(m));
  EXPECT_GE(n, 49);
  EXPECT_LE(n, 51);
  for (float v : m.values) ASSERT_TRUE(v == 0.0f || v == 1.0f);
  const CurbMask thick = rasterize_polylines(lines, GridSpec{}, 3);
  EXPECT_TRUE(is_subset(m, thick));
  EXPECT_GT(count_on(thick), 2 * count_on(m));
}

TEST(RasterizePolylines, DiagonalIsEightConnected) {
  const CurbMask m = rasterize_polylines(std::vector<Polyline>{{{-3.0, -2.0}, {4.0, 6.5}}}, GridSpec{}, 1);
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (m.at(r, c) < 0.5f) continue;
      int nb = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          if ((dr || dc) && m.grid.inside(r + dr, c + dc) && m.at(r + dr, c + dc) > 0.5f) ++nb;
      ASSERT_GE(nb, 1);
      ASSERT_LE(nb, 2);
    }
  }
}

TEST(WarpMask, IdentityIsBitwiseEqual) {
  std::mt19937_64 rng(14);
  const CurbMask m = random_mask(rng, small_grid(64, 96), 0.2);
  EXPECT_EQ(warp_mask(m, Transform::identity()), m);
}

TEST(WarpMask, ForwardShiftMovesRows) {
  std::mt19937_64 rng(15);
  const GridSpec g = small_grid(40, 60);
  const CurbMask m = random_mask(rng, g, 0.3);
  for (int k : {1, 3, 7}) {
    Transform t;
    t.translation = Eigen::Vector3d(0, 0, k * g.resolution);
    const CurbMask w = warp_mask(m, t);
    for (int r = 0; r < g.height; ++r) {
      for (int c = 0; c < g.width; ++c) {
        const float expect = r + k < g.height ? m.at(r + k, c) : 0.0f;
        ASSERT_EQ(w.at(r, c), expect) << "k=" << k << " r=" << r << " c=" << c;
      }
    }
  }
}

CurbMask blob_mask(std::mt19937_64& rng, const GridSpec& g, int blobs) {
  CurbMask m(g);
  std::uniform_int_distribution<int> ur(10, g.height - 11), uc(10, g.width - 11), rad(2, 6);
  for (int b = 0; b < blobs; ++b) {
    const int r0 = ur(rng), c0 = uc(rng), rr = rad(rng);
    for (int r = r0 - rr; r <= r0 + rr; ++r)
      for (int c = c0 - rr; c <= c0 + rr; ++c)
        if ((r - r0) * (r - r0) + (c - c0) * (c - c0) <= rr * rr) m.at(r, c) = 1.0f;
  }
  return m;
}

TEST(WarpMask, ForwardThenBackAgrees) {
  std::mt19937_64 rng(16);
  const GridSpec g = small_grid(120, 160);
  std::uniform_real_distribution<double> yaw(-0.2, 0.2), tr(-0.8, 0.8);
  for (int trial = 0; trial < 10; ++trial) {
    const CurbMask m = blob_mask(rng, g, 8);
    const Transform t = Transform::from_yaw(yaw(rng), Eigen::Vector3d(tr(rng), 0.0, tr(rng)));
    const CurbMask back = warp_mask(warp_mask(m, t), invert(t));
    std::size_t agree = 0;
    for (std::size_t i = 0; i < m.values.size(); ++i) agree += m.values[i] == back.values[i] ? 1 : 0;
    EXPECT_GE(static_cast<double>(agree) / m.values.size(), 0.95);
  }
}

TEST(Dilate, RadiusZeroIsIdentity) {
  std::mt19937_64 rng(17);
  const CurbMask m = random_mask(rng, small_grid(32, 32), 0.1);
  EXPECT_EQ(dilate(m, 0), m);
}

TEST(Dilate, SinglePixelBecomesBlock) {
  CurbMask m(small_grid(9, 9));
  m.at(4, 4) = 1.0f;
  const CurbMask d = dilate(m, 1);
  EXPECT_EQ(count_on(d), 9u);
  for (int r = 3; r <= 5; ++r)
    for (int c = 3; c <= 5; ++c) EXPECT_EQ(d.at(r, c), 1.0f);
}

CurbMask brute_dilate(const CurbMask& m, int rad) {
  CurbMask out(m.grid);
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c)
      for (int dr = -rad; dr <= rad; ++dr)
        for (int dc = -rad; dc <= rad; ++dc)
          if (m.grid.inside(r + dr, c + dc)) out.at(r, c) = std::max(out.at(r, c), m.at(r + dr, c + dc));
  return out;
}

TEST(Dilate, MatchesBruteForceAndComposes) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const CurbMask m = random_mask(rng, small_grid(32, 32), 0.05);
    EXPECT_EQ(dilate(m, 2), brute_dilate(m, 2));
    EXPECT_EQ(dilate(dilate(m, 1), 1), dilate(m, 2));
  }
}

TEST(Dilate, MonotoneAndExtensive) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const CurbMask a = random_mask(rng, small_grid(32, 24), 0.05);
    const CurbMask b = mask_union(a, random_mask(rng, a.grid, 0.05));
    EXPECT_TRUE(is_subset(a, dilate(a, 1)));
    EXPECT_TRUE(is_subset(dilate(a, 2), dilate(b, 2)));
  }
}

TEST(MaskAlgebra, GridMismatchThrows) {
  const CurbMask a(small_grid(8, 8)), b(small_grid(8, 16));
  EXPECT_THROW(mask_union(a, b), GridMismatch);
  EXPECT_THROW(is_subset(a, b), GridMismatch);
}

TEST(MaskAlgebra, ThresholdStrictness) {
  CurbMask m(small_grid(2, 1));
  m.values = {0.7f, 0.71f};
  EXPECT_EQ(count_on(threshold(m, 0.7f)), 2u);
  EXPECT_EQ(count_on(threshold(m, 0.7f, true)), 1u);
}

TEST(Files, PgmRoundTrip) {
  std::mt19937_64 rng(20);
  const CurbMask m = random_mask(rng, small_grid(33, 17), 0.3);
  const auto path = std::filesystem::temp_directory_path() / "curb_mask.pgm";
  write_pgm(path, m);
  EXPECT_EQ(read_pgm(path, 0.1), m);
  std::filesystem::remove(path);
}

TEST(Files, BevRoundTrip) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<float> ux(-4, 4), uz(-6, 6), uy(-3, 0), ui(0, 1);
  LidarScan s;
  for (int i = 0; i < 500; ++i) s.points.push_back({ux(rng), uy(rng), uz(rng), ui(rng)});
  const BevImage img = rasterize_cloud(s, small_grid(80, 120));
  const auto path = std::filesystem::temp_directory_path() / "curb_bev.f32";
  write_bev(path, img);
  const BevImage back = read_bev(path);
  EXPECT_EQ(back.grid, img.grid);
  EXPECT_EQ(back.data, img.data);
  EXPECT_DOUBLE_EQ(back.range_scale, img.range_scale);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

}  // namespace
}  // namespace curb
