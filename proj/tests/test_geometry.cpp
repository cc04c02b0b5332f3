#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "curb/errors.hpp"
#include "curb/geometry.hpp"
#include "support/oracles.hpp"

namespace curb {
namespace {

using testing::random_trajectory;
using testing::random_transform;

constexpr double kDeg = std::numbers::pi / 180.0;

double rotation_error(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).norm() + std::abs(r.determinant() - 1.0);
}

TEST(Compose, IdentityWithIdentity) {
  const Transform r = compose(Transform::identity(), Transform::identity());
  EXPECT_EQ(transform_distance(r, Transform::identity()), 0.0);
}

TEST(Compose, AppliesRightOperandFirst) {
  const Transform a = Transform::from_yaw(std::numbers::pi / 2, Eigen::Vector3d::Zero());
  const Transform b = Transform::from_yaw(0.0, Eigen::Vector3d(0, 0, 1));
  // b moves (0,0,0) to (0,0,1); a then turns +z into +x.
  const Eigen::Vector3d p = compose(a, b).apply(Eigen::Vector3d::Zero());
  EXPECT_NEAR(p.x(), 1.0, 1e-12);
  EXPECT_NEAR(p.y(), 0.0, 1e-12);
  EXPECT_NEAR(p.z(), 0.0, 1e-12);
}

TEST(Compose, WithInverseIsIdentity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Transform t = random_transform(rng);
    EXPECT_LT(transform_distance(compose(t, invert(t)), Transform::identity()), 1e-9);
    EXPECT_LT(transform_distance(compose(invert(t), t), Transform::identity()), 1e-9);
  }
}

TEST(Compose, LongProductStaysOrthonormal) {
  std::mt19937_64 rng(2);
  Transform acc;
  for (int i = 0; i < 100; ++i) {
    acc = compose(acc, random_transform(rng));
    ASSERT_LT(rotation_error(acc.rotation), 1e-9);
  }
  EXPECT_NEAR(acc.rotation.determinant(), 1.0, 1e-9);
}

TEST(Invert, Identity) { EXPECT_EQ(transform_distance(invert(Transform::identity()), Transform::identity()), 0.0); }

TEST(Invert, PureTranslation) {
  Transform t;
  t.translation = Eigen::Vector3d(1, 2, 3);
  const Transform inv = invert(t);
  EXPECT_EQ(inv.translation, Eigen::Vector3d(-1, -2, -3));
  EXPECT_EQ(inv.rotation, Eigen::Matrix3d::Identity());
}

TEST(Invert, DoubleInverse) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Transform t = random_transform(rng);
    EXPECT_LT(transform_distance(invert(invert(t)), t), 1e-12);
  }
}

TEST(Transform, QuaternionRoundTrip) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Transform t = random_transform(rng);
    const Transform back = Transform::from_quaternion(t.quaternion(), t.translation);
    EXPECT_LT(transform_distance(back, t), 1e-12);
    EXPECT_GE(t.quaternion().w(), 0.0);
  }
}

TEST(Transform, PlanarProjectionOfYaw) {
  const PlanarMotion m = to_planar(Transform::from_yaw(0.3, Eigen::Vector3d(1.5, 9.0, -2.0)));
  EXPECT_NEAR(m.yaw, 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(m.tx, 1.5);
  EXPECT_DOUBLE_EQ(m.tz, -2.0);
}

Trajectory two_knots(const Transform& a, const Transform& b, Micros t0 = 0, Micros t1 = 1000) {
  return Trajectory({{t0, a}, {t1, b}});
}

TEST(Trajectory, RejectsUnsortedTimestamps) {
  EXPECT_THROW(Trajectory({{10, {}}, {10, {}}}), std::invalid_argument);
  EXPECT_THROW(Trajectory({{10, {}}, {5, {}}}), std::invalid_argument);
}

TEST(Interpolate, ExactAtKnots) {
  std::mt19937_64 rng(5);
  const Trajectory traj = random_trajectory(rng, 8);
  for (const auto& k : traj.poses()) {
    EXPECT_LT(transform_distance(traj.interpolate_at(k.timestamp), k.pose), 1e-12);
  }
}

TEST(Interpolate, TranslationMidpoint) {
  const Trajectory traj = two_knots(Transform::identity(), Transform::from_yaw(0.0, Eigen::Vector3d(2, 0, 0)));
  const Transform mid = traj.interpolate_at(500);
  EXPECT_NEAR((mid.translation - Eigen::Vector3d(1, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_LT((mid.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-12);
}

TEST(Interpolate, YawMidpoint) {
  const Trajectory traj = two_knots(Transform::from_yaw(0.0, Eigen::Vector3d::Zero()),
                                    Transform::from_yaw(10.0 * kDeg, Eigen::Vector3d::Zero()));
  EXPECT_NEAR(to_planar(traj.interpolate_at(500)).yaw, 5.0 * kDeg, 1e-9);
}

TEST(Interpolate, ShortestArc) {
  // 350 degrees of yaw is the same as -10; the midpoint must be -5.
  const Trajectory traj = two_knots(Transform::from_yaw(0.0, Eigen::Vector3d::Zero()),
                                    Transform::from_yaw(350.0 * kDeg, Eigen::Vector3d::Zero()));
  EXPECT_NEAR(to_planar(traj.interpolate_at(500)).yaw, -5.0 * kDeg, 1e-9);
}

TEST(Interpolate, OutsideSpanThrows) {
  const Trajectory traj = two_knots(Transform::identity(), Transform::identity(), 100, 200);
  EXPECT_THROW(traj.interpolate_at(99), OutOfRange);
  EXPECT_THROW(traj.interpolate_at(201), OutOfRange);
  EXPECT_NO_THROW(traj.interpolate_at(100));
  EXPECT_NO_THROW(traj.interpolate_at(200));
  EXPECT_THROW(Trajectory(std::vector<TimedPose>{{0, Transform{}}}).interpolate_at(0), OutOfRange);
}

TEST(Interpolate, ContinuousAcrossMicroseconds) {
  std::mt19937_64 rng(6);
  const Trajectory traj = random_trajectory(rng, 6);
  std::uniform_int_distribution<Micros> pick(traj.start(), traj.end() - 1);
  for (int i = 0; i < 200; ++i) {
    const Micros t = pick(rng);
    EXPECT_LT(transform_distance(traj.interpolate_at(t), traj.interpolate_at(t + 1)), 1e-3);
  }
}

TEST(Interpolate, RotationsStayOrthonormal) {
  std::mt19937_64 rng(7);
  const Trajectory traj = random_trajectory(rng, 10);
  std::uniform_int_distribution<Micros> pick(traj.start(), traj.end());
  for (int i = 0; i < 200; ++i) EXPECT_LT(rotation_error(traj.interpolate_at(pick(rng)).rotation), 1e-9);
}

TEST(RelativeTransform, SameTimeIsIdentity) {
  std::mt19937_64 rng(8);
  const Trajectory traj = random_trajectory(rng, 5);
  const Micros t = (traj.start() + traj.end()) / 2;
  EXPECT_LT(transform_distance(traj.relative_transform(t, t), Transform::identity()), 1e-12);
}

TEST(RelativeTransform, ChainProperty) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory traj = random_trajectory(rng, 7);
    std::uniform_int_distribution<Micros> pick(traj.start(), traj.end());
    const Micros a = pick(rng), b = pick(rng), c = pick(rng);
    const Transform chained = compose(traj.relative_transform(a, b), traj.relative_transform(b, c));
    EXPECT_LT(transform_distance(chained, traj.relative_transform(a, c)), 1e-9);
    EXPECT_LT(transform_distance(traj.relative_transform(a, c), traj.relative_transform_direct(a, c)), 1e-9);
  }
}

TEST(RelativeTransform, ConstantVelocity) {
  // 10 m/s along z, knots every 62.5 ms, query 0.1 s apart between knots.
  std::vector<TimedPose> knots;
  for (Micros t = 0; t <= 1000000; t += 62500) {
    knots.push_back({t, Transform::from_yaw(0.0, Eigen::Vector3d(0, 0, 10.0 * static_cast<double>(t) * 1e-6))});
  }
  const Trajectory traj(std::move(knots));
  const Transform rel = traj.relative_transform(431250 - 31250 + 100000, 431250 - 31250);
  EXPECT_NEAR(rel.translation.norm(), 1.0, 1e-9);
  // Frame at the later time sees the earlier origin behind it.
  EXPECT_NEAR(rel.translation.z(), -1.0, 1e-9);
}

TEST(RelativeTransform, OutsideSpanThrows) {
  const Trajectory traj = two_knots(Transform::identity(), Transform::identity(), 0, 10);
  EXPECT_THROW(traj.relative_transform(11, 0), OutOfRange);
  EXPECT_THROW(traj.relative_transform(0, -1), OutOfRange);
}

TEST(PoseFile, RoundTrip) {
  std::mt19937_64 rng(10);
  const Trajectory traj = random_trajectory(rng, 6);
  const auto path = std::filesystem::temp_directory_path() / "curb_pose_roundtrip.jsonl";
  write_pose_file(path, traj);
  const Trajectory back = read_pose_file(path);
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(back.poses()[i].timestamp, traj.poses()[i].timestamp);
    EXPECT_LT(transform_distance(back.poses()[i].pose, traj.poses()[i].pose), 1e-12);
  }
  std::filesystem::remove(path);
}

TEST(PoseFile, RejectsUnnormalizedQuaternion) {
  const auto path = std::filesystem::temp_directory_path() / "curb_pose_bad.jsonl";
  {
    std::ofstream os(path);
    os << R"({"t_us": 0, "q": [1.0, 0.0, 0.0, 0.0], "p": [0, 0, 0]})" << '\n';
    os << R"({"t_us": 5, "q": [1.001, 0.0, 0.0, 0.0], "p": [0, 0, 0]})" << '\n';
  }
  EXPECT_THROW(read_pose_file(path), FormatError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace curb
