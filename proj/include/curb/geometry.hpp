#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace curb {

/// Microsecond timestamps; integers so knots compare exactly.
using Micros = std::int64_t;

/// Rigid body transform. Applies as p' = rotation * p + translation.
///
/// Frame convention used throughout: x lateral (right positive), y vertical
/// (up positive), z longitudinal (forward positive).
struct Transform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Transform identity() { return {}; }
  static Transform from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& p);
  /// Rotation by `yaw` radians about +y followed by translation.
  static Transform from_yaw(double yaw, const Eigen::Vector3d& p);

  Eigen::Quaterniond quaternion() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

/// Result applies `b` first, then `a`.
Transform compose(const Transform& a, const Transform& b);
Transform invert(const Transform& t);

/// Frobenius distance between two transforms (rotation and translation summed).
double transform_distance(const Transform& a, const Transform& b);

/// Projects onto the ground plane: yaw about +y and the x/z translation.
struct PlanarMotion {
  double yaw = 0.0;
  double tx = 0.0;
  double tz = 0.0;
};
PlanarMotion to_planar(const Transform& t);

struct TimedPose {
  Micros timestamp = 0;
  Transform pose;  // world-from-sensor
};

/// Time-indexed pose stream, strictly increasing in time.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws std::invalid_argument unless timestamps strictly increase.
  explicit Trajectory(std::vector<TimedPose> poses);

  const std::vector<TimedPose>& poses() const { return poses_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  Micros start() const;
  Micros end() const;
  bool contains(Micros t) const;

  /// World-from-sensor pose at `t`. Translation is interpolated linearly,
  /// rotation by shortest-arc slerp. Exact at stored knots.
  Transform interpolate_at(Micros t) const;

  /// Sensor-frame-at-`t_to` from sensor-frame-at-`t_from`.
  ///
  /// Built as a chain: an interpolated step from `t_from` to the nearest knot,
  /// a product of knot-to-knot steps, then an interpolated step to `t_to`.
  Transform relative_transform(Micros t_to, Micros t_from) const;

  /// invert(interpolate_at(t_to)) * interpolate_at(t_from), without chaining.
  Transform relative_transform_direct(Micros t_to, Micros t_from) const;

 private:
  std::vector<TimedPose> poses_;
};

/// Reads a JSON Lines pose file: {"t_us", "q": [w,x,y,z], "p": [x,y,z]}.
/// Quaternions whose norm is off by more than 1e-6 are rejected.
Trajectory read_pose_file(const std::filesystem::path& path);
void write_pose_file(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace curb
