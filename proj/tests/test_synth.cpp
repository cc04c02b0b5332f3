#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "curb/errors.hpp"
#include "curb/synth.hpp"
#include "curb/visibility.hpp"
#include "support/oracles.hpp"

namespace curb {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

SceneSpec straight_scene(double width) {
  SceneSpec s;
  s.road.width = width;
  for (double side : {-1.0, 1.0}) {
    Polyline line;
    for (double z = s.road.s_begin; z <= s.road.s_end; z += 0.5) line.push_back({side * 0.5 * width, z});
    s.curbs.push_back(std::move(line));
  }
  return s;
}

Obstacle box(double cx, double cz, double width, double length, double height) {
  Obstacle o;
  o.cx = cx;
  o.cz = cz;
  o.width = width;
  o.length = length;
  o.height = height;
  return o;
}

TEST(Scene, DeterministicSerialization) {
  EXPECT_EQ(scene_to_json(generate_scene(0)), scene_to_json(generate_scene(0)));
  EXPECT_NE(scene_to_json(generate_scene(0)), scene_to_json(generate_scene(1)));
}

TEST(Scene, JsonRoundTrip) {
  const SceneSpec s = generate_scene(17);
  EXPECT_EQ(scene_to_json(scene_from_json(scene_to_json(s))), scene_to_json(s));
  EXPECT_THROW(scene_from_json("{not json"), FormatError);
}

// Distance of the footprint to the nearest curb, sampled densely along its
// edges, and whether it stays on one side of that curb.
struct CurbGap {
  double min_gap = 1e9;
  double max_gap = 0.0;
  bool one_side = true;
};

CurbGap footprint_gap(const SceneSpec& s, const Obstacle& o) {
  const auto fp = o.footprint();
  CurbGap g;
  int sign = 0;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    const Point2 a = fp[i], b = fp[(i + 1) % fp.size()];
    for (int k = 0; k <= 40; ++k) {
      const double t = k / 40.0;
      const double lat = s.road.lateral(a.x + t * (b.x - a.x), a.z + t * (b.z - a.z));
      const double d = std::abs(lat) - 0.5 * s.road.width;
      const int sg = d > 0 ? 1 : -1;
      if (sign == 0) sign = sg;
      g.one_side = g.one_side && sg == sign;
      g.min_gap = std::min(g.min_gap, std::abs(d));
      g.max_gap = std::max(g.max_gap, std::abs(d));
    }
  }
  return g;
}

TEST(Scene, ObstacleCountAndPlacementRule) {
  int with_obstacles = 0, curved = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const SceneSpec s = generate_scene(seed);
    ASSERT_LE(s.obstacles.size(), 6u);
    with_obstacles += !s.obstacles.empty();
    curved += s.road.curvature != 0.0;
    ASSERT_EQ(s.curbs.size(), 2u);
    for (const Obstacle& o : s.obstacles) {
      const CurbGap g = footprint_gap(s, o);
      EXPECT_TRUE(g.one_side) << seed;
      EXPECT_GE(g.min_gap, 0.5) << seed;
      EXPECT_LE(g.min_gap, 3.0) << seed;
    }
  }
  EXPECT_GT(with_obstacles, 700);
  EXPECT_GT(curved, 400);
  EXPECT_LT(curved, 800);
}

TEST(Road, LateralAndStationOnArc) {
  RoadSpec r;
  r.curvature = 1.0 / 50.0;
  for (double s : {-20.0, 0.0, 13.0, 70.0}) {
    const Point2 c = r.centre(s);
    EXPECT_NEAR(r.lateral(c.x, c.z), 0.0, 1e-9);
    EXPECT_NEAR(r.station(c.x, c.z), s, 1e-9);
    const double h = r.heading(s);
    EXPECT_NEAR(r.lateral(c.x + 2.0 * std::cos(h), c.z - 2.0 * std::sin(h)), 2.0, 1e-9);
  }
}

TEST(Scan, FlatGroundRangesMatchClosedForm) {
  const SceneSpec s = straight_scene(400.0);
  BeamConfig beams;
  const Transform pose = sensor_pose_at(s.road, 0.0, beams.sensor_height);
  const double step = (beams.elevation_max_deg - beams.elevation_min_deg) / (beams.rings - 1);

  beams.range_noise_sigma = 0.0;
  for (const auto& p : simulate_scan(s, pose, beams, 1).points) {
    const double r = std::sqrt(double(p.x) * p.x + double(p.y) * p.y + double(p.z) * p.z);
    EXPECT_NEAR(p.y, -beams.sensor_height, 1e-4);
    const double elev = std::asin(p.y / r);
    const double ring = std::round((elev / kDeg - beams.elevation_min_deg) / step);
    const double e = (beams.elevation_min_deg + ring * step) * kDeg;
    EXPECT_NEAR(r, beams.sensor_height / std::sin(std::abs(e)), 1e-4);
  }

  beams.range_noise_sigma = 0.02;
  std::size_t n = 0, within = 0;
  for (const auto& p : simulate_scan(s, pose, beams, 2).points) {
    const Eigen::Vector3d v(p.x, p.y, p.z);
    const Eigen::Vector3d dir = v.normalized();
    const double e = std::asin(dir.y());
    const double ring = std::round((e / kDeg - beams.elevation_min_deg) / step);
    const double expect = beams.sensor_height / std::sin(std::abs((beams.elevation_min_deg + ring * step) * kDeg));
    ++n;
    within += std::abs(v.norm() - expect) <= 3.0 * beams.range_noise_sigma;
  }
  ASSERT_GT(n, 10000u);
  EXPECT_GE(static_cast<double>(within) / n, 0.99);
}

TEST(Scan, TallBoxAheadCastsShadow) {
  SceneSpec s = straight_scene(8.0);
  s.obstacles.push_back(box(0.0, 10.0, 1.8, 4.5, 3.0));
  const Transform pose = sensor_pose_at(s.road, 0.0, 2.0);
  const LidarScan scan = simulate_scan(s, pose, BeamConfig{}, 3);
  const double half_angle = std::atan2(0.9, 12.25) - 0.2 * kDeg;
  int in_sector = 0;
  for (const auto& p : scan.points) {
    const double az = std::atan2(p.x, p.z);
    if (std::abs(az) > half_angle) continue;
    ++in_sector;
    EXPECT_LE(std::hypot(p.x, p.z), 12.35);
    if (std::hypot(p.x, p.z) > 7.8) EXPECT_NEAR(p.intensity, 0.7, 0.051);
  }
  EXPECT_GT(in_sector, 20);
}

TEST(Scan, DeterministicPerSeed) {
  const SceneSpec s = generate_scene(4);
  const Transform pose = sensor_pose_at(s.road, 5.0, 2.0);
  EXPECT_EQ(simulate_scan(s, pose, BeamConfig{}, 9).points, simulate_scan(s, pose, BeamConfig{}, 9).points);
  BeamConfig quiet;
  quiet.range_noise_sigma = 0.0;
  quiet.intensity_noise = 0.0;
  EXPECT_EQ(simulate_scan(s, pose, quiet, 1).points, simulate_scan(s, pose, quiet, 2).points);
}

TEST(Scan, MaterialIntensitiesAndTrimBounds) {
  const SceneSpec s = generate_scene(6);
  const LidarScan scan = simulate_scan(s, sensor_pose_at(s.road, 0.0, 2.0), BeamConfig{}, 4);
  for (const auto& p : scan.points) {
    const bool road = std::abs(p.intensity - 0.2f) <= 0.0501f;
    const bool curb = std::abs(p.intensity - 0.5f) <= 0.0501f;
    const bool obstacle = std::abs(p.intensity - 0.7f) <= 0.0501f;
    EXPECT_TRUE(road || curb || obstacle);
  }
  for (const auto& p : trim_scan(scan).points) {
    EXPECT_LE(p.y, 0.0f);
    EXPECT_GE(p.y, -3.55f);
    EXPECT_LE(std::abs(p.x), 24.0f);
    EXPECT_LE(std::abs(p.z), 48.0f);
  }
}

TEST(Labels, NoObstaclesMeansNothingOccluded) {
  SceneSpec s = generate_scene(2);
  s.obstacles.clear();
  const LabelSet l = ground_truth_labels(s, sensor_pose_at(s.road, 0.0, 2.0), GridSpec{});
  EXPECT_GT(count_on(l.curb), 1000u);
  EXPECT_EQ(count_on(l.occluded), 0u);
  EXPECT_EQ(l.visible, l.curb);
}

TEST(Labels, BoxShadowMatchesAnalyticFrustum) {
  SceneSpec s = straight_scene(8.0);
  // Box spanning x in [-3.5, -2.5], z in [5, 9]; the left curb runs at x = -4.
  s.obstacles.push_back(box(-3.0, 7.0, 1.0, 4.0, 1.5));
  const GridSpec g;
  const LabelSet l = ground_truth_labels(s, sensor_pose_at(s.road, 0.0, 2.0), g);
  // A ray to (-4, z) crosses the box iff [0.625 z, 0.875 z] meets [5, 9].
  int checked = 0;
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (l.curb.at(r, c) < 0.5f || g.x_of(c) > 0.0) continue;
      const double z = g.z_of(r);
      if (z > 6.0 && z < 14.0) {
        EXPECT_EQ(l.occluded.at(r, c), 1.0f) << z;
        ++checked;
      }
      if (z < 5.4 || z > 14.8) EXPECT_EQ(l.visible.at(r, c), 1.0f) << z;
    }
  }
  EXPECT_GT(checked, 70);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (g.x_of(c) > 0.0) EXPECT_EQ(l.occluded.at(r, c), 0.0f);
    }
  }
}

TEST(Labels, PartitionIsExactOnRandomScenes) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SceneSpec s = generate_scene(seed);
    const LabelSet l = ground_truth_labels(s, sensor_pose_at(s.road, 3.0, 2.0), testing::small_grid(240, 480));
    EXPECT_EQ(mask_union(l.visible, l.occluded), l.curb);
    EXPECT_EQ(count_on(mask_intersection(l.visible, l.occluded)), 0u);
  }
}

TEST(Labels, AgreeWithPointCloudPartition) {
  const GridSpec g;
  std::size_t total = 0, agree = 0, occluded = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const SceneSpec s = generate_scene(seed);
    const Transform pose = sensor_pose_at(s.road, 2.0, 2.0);
    const LabelSet l = ground_truth_labels(s, pose, g);
    const LidarScan cloud = trim_scan(simulate_scan(s, pose, BeamConfig{}, seed));
    const VisibilityPartition p = partition_labels(l.curb, obstacle_mask(cloud, g));
    for (std::size_t i = 0; i < l.curb.values.size(); ++i) {
      if (l.curb.values[i] < 0.5f) continue;
      ++total;
      occluded += l.occluded.values[i] > 0.5f;
      agree += (l.occluded.values[i] > 0.5f) == (p.occluded.values[i] > 0.5f);
    }
  }
  ASSERT_GT(occluded, 0u);
  EXPECT_GE(static_cast<double>(agree) / total, 0.95);
}

TEST(Sequence, StationaryVehicleHasIdenticalPoses) {
  SequenceConfig cfg;
  cfg.n_frames = 5;
  cfg.speed = 0.0;
  cfg.grid = testing::small_grid(64, 64);
  const Sequence seq = generate_sequence(generate_scene(3), cfg, 1);
  for (const auto& p : seq.trajectory.poses()) EXPECT_EQ(transform_distance(p.pose, seq.trajectory.poses()[0].pose), 0.0);
}

TEST(Sequence, ScanSpacingAndClockOffset) {
  for (std::uint64_t scene_seed : {0u, 1u, 5u}) {
    SequenceConfig cfg;
    cfg.grid = testing::small_grid(32, 32);
    cfg.beams.azimuth_step_deg = 6.0;
    const Sequence seq = generate_sequence(generate_scene(scene_seed), cfg, 7);
    ASSERT_EQ(seq.scans.size(), 30u);
    for (std::size_t k = 0; k < seq.scans.size(); ++k) {
      for (const auto& knot : seq.trajectory.poses()) EXPECT_NE(seq.scans[k].timestamp, knot.timestamp);
      if (k == 0) continue;
      const Transform a = seq.trajectory.interpolate_at(seq.scans[k - 1].timestamp);
      const Transform b = seq.trajectory.interpolate_at(seq.scans[k].timestamp);
      EXPECT_NEAR((b.translation - a.translation).norm(), 1.0, 1e-3);
    }
  }
}

TEST(Sequence, DeterministicAndRoundTrips) {
  SequenceConfig cfg;
  cfg.n_frames = 3;
  cfg.grid = testing::small_grid(64, 96);
  cfg.beams.azimuth_step_deg = 2.0;
  const SceneSpec scene = generate_scene(8);
  const Sequence a = generate_sequence(scene, cfg, 11);
  const Sequence b = generate_sequence(scene, cfg, 11);
  for (std::size_t k = 0; k < a.scans.size(); ++k) EXPECT_EQ(a.scans[k].points, b.scans[k].points);

  const auto dir = std::filesystem::temp_directory_path() / "curb_seq_test";
  std::filesystem::remove_all(dir);
  write_sequence(dir, a);
  const Sequence r = read_sequence(dir);
  ASSERT_EQ(r.scans.size(), a.scans.size());
  for (std::size_t k = 0; k < a.scans.size(); ++k) {
    EXPECT_EQ(r.scans[k].timestamp, a.scans[k].timestamp);
    EXPECT_EQ(r.scans[k].points, a.scans[k].points);
    EXPECT_EQ(r.labels[k].curb.values, a.labels[k].curb.values);
    EXPECT_EQ(r.labels[k].occluded.values, a.labels[k].occluded.values);
  }
  ASSERT_EQ(r.trajectory.size(), a.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    EXPECT_EQ(r.trajectory.poses()[i].timestamp, a.trajectory.poses()[i].timestamp);
    EXPECT_LT(transform_distance(r.trajectory.poses()[i].pose, a.trajectory.poses()[i].pose), 1e-12);
  }
  EXPECT_EQ(scene_to_json(r.scene), scene_to_json(scene));
  std::filesystem::remove_all(dir);
}

TEST(Sequence, RejectsBadRates) {
  SequenceConfig cfg;
  cfg.pose_rate = 0.0;
  EXPECT_THROW(generate_sequence(generate_scene(0), cfg, 0), ConfigError);
}

BevImage textured_bev(const GridSpec& g) {
  BevImage bev(g);
  for (std::size_t i = 0; i < bev.data.size(); ++i) bev.data[i] = static_cast<float>((i * 37) % 101) / 100.0f;
  return bev;
}

TEST(Augment, IdentityLeavesDataUnchanged) {
  const GridSpec g = testing::small_grid(64, 96);
  std::mt19937_64 rng(1);
  BevImage bev = textured_bev(g);
  CurbMask m = testing::random_border_segment(rng, g);
  const BevImage bev0 = bev;
  const CurbMask m0 = m;
  apply_augment(AugmentParams{}, bev, {&m});
  EXPECT_EQ(bev.data, bev0.data);
  EXPECT_EQ(m, m0);
}

TEST(Augment, MirrorIsAnInvolution) {
  const GridSpec g = testing::small_grid(64, 96);
  std::mt19937_64 rng(2);
  BevImage bev = textured_bev(g);
  CurbMask m = testing::random_border_segment(rng, g);
  const BevImage bev0 = bev;
  const CurbMask m0 = m;
  AugmentParams p;
  p.mirror = true;
  apply_augment(p, bev, {&m});
  EXPECT_NE(m, m0);
  apply_augment(p, bev, {&m});
  EXPECT_EQ(bev.data, bev0.data);
  EXPECT_EQ(m, m0);
}

TEST(Augment, TranslationPreservesPixelCount) {
  const GridSpec g = testing::small_grid(128, 128);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    CurbMask m(g);
    std::uniform_real_distribution<double> u(20.0, 108.0);
    draw_segment(m, u(rng), u(rng), u(rng), u(rng));
    const std::size_t before = count_on(m);
    BevImage bev = textured_bev(g);
    AugmentParams p;
    p.shift_col = 16 - 3 * t;
    p.shift_row = -16 + 2 * t;
    apply_augment(p, bev, {&m});
    EXPECT_NEAR(static_cast<double>(count_on(m)), static_cast<double>(before), 0.02 * before);
  }
}

TEST(Augment, DrawsWithinLimitsAndIsDeterministic) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const AugmentParams p = draw_augment(seed);
    EXPECT_LE(std::abs(p.shift_col), 16);
    EXPECT_LE(std::abs(p.shift_row), 16);
    EXPECT_LE(std::abs(p.rotate_deg), 5.0);
  }
  const GridSpec g = testing::small_grid(64, 64);
  std::mt19937_64 rng(4);
  const CurbMask m0 = testing::random_border_segment(rng, g);
  BevImage b1 = textured_bev(g), b2 = textured_bev(g);
  CurbMask m1 = m0, m2 = m0;
  augment(b1, {&m1}, 77);
  augment(b2, {&m2}, 77);
  EXPECT_EQ(b1.data, b2.data);
  EXPECT_EQ(m1, m2);
}

TEST(Augment, RejectsMismatchedMasks) {
  BevImage bev(testing::small_grid(32, 32));
  CurbMask m(testing::small_grid(32, 16));
  EXPECT_THROW(apply_augment(AugmentParams{}, bev, {&m}), GridMismatch);
}

}  // namespace
}  // namespace curb
