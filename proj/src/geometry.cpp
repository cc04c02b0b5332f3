#include "curb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "curb/errors.hpp"

namespace curb {
namespace {

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  const double drift = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  if (drift <= 1e-12) return r;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

}  // namespace

Transform Transform::from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& p) {
  Transform t;
  t.rotation = q.normalized().toRotationMatrix();
  t.translation = p;
  return t;
}

Transform Transform::from_yaw(double yaw, const Eigen::Vector3d& p) {
  Transform t;
  t.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
  t.translation = p;
  return t;
}

Eigen::Quaterniond Transform::quaternion() const {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Transform compose(const Transform& a, const Transform& b) {
  Transform out;
  out.rotation = orthonormalize(a.rotation * b.rotation);
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Transform invert(const Transform& t) {
  Transform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

double transform_distance(const Transform& a, const Transform& b) {
  return (a.rotation - b.rotation).norm() + (a.translation - b.translation).norm();
}

PlanarMotion to_planar(const Transform& t) {
  // Rotation about +y maps x to (cos, -sin) in the (x, z) rows.
  const double yaw = std::atan2(t.rotation(0, 2) - t.rotation(2, 0), t.rotation(0, 0) + t.rotation(2, 2));
  return {yaw, t.translation.x(), t.translation.z()};
}

Trajectory::Trajectory(std::vector<TimedPose> poses) : poses_(std::move(poses)) {
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (poses_[i].timestamp <= poses_[i - 1].timestamp) {
      throw std::invalid_argument("trajectory timestamps must strictly increase");
    }
  }
}

Micros Trajectory::start() const {
  if (poses_.empty()) throw OutOfRange("empty trajectory");
  return poses_.front().timestamp;
}

Micros Trajectory::end() const {
  if (poses_.empty()) throw OutOfRange("empty trajectory");
  return poses_.back().timestamp;
}

bool Trajectory::contains(Micros t) const {
  return poses_.size() >= 2 && t >= poses_.front().timestamp && t <= poses_.back().timestamp;
}

Transform Trajectory::interpolate_at(Micros t) const {
  if (!contains(t)) {
    throw OutOfRange("timestamp " + std::to_string(t) + " outside trajectory span");
  }
  auto it = std::lower_bound(poses_.begin(), poses_.end(), t,
                             [](const TimedPose& p, Micros v) { return p.timestamp < v; });
  if (it->timestamp == t) return it->pose;
  const TimedPose& hi = *it;
  const TimedPose& lo = *(it - 1);
  const double f = static_cast<double>(t - lo.timestamp) / static_cast<double>(hi.timestamp - lo.timestamp);

  // Eigen's slerp already picks the shorter arc.
  const Eigen::Quaterniond q = lo.pose.quaternion().slerp(f, hi.pose.quaternion());
  Transform out;
  out.rotation = q.normalized().toRotationMatrix();
  out.translation = (1.0 - f) * lo.pose.translation + f * hi.pose.translation;
  return out;
}

Transform Trajectory::relative_transform_direct(Micros t_to, Micros t_from) const {
  return compose(invert(interpolate_at(t_to)), interpolate_at(t_from));
}

Transform Trajectory::relative_transform(Micros t_to, Micros t_from) const {
  if (!contains(t_to) || !contains(t_from)) {
    throw OutOfRange("relative_transform timestamps outside trajectory span");
  }
  if (t_to == t_from) return Transform::identity();

  // Stations visited from t_from to t_to: the endpoints plus every knot
  // strictly between them.
  std::vector<Micros> stations{t_from};
  const Micros lo = std::min(t_to, t_from);
  const Micros hi = std::max(t_to, t_from);
  std::vector<Micros> knots;
  for (const auto& p : poses_) {
    if (p.timestamp > lo && p.timestamp < hi) knots.push_back(p.timestamp);
  }
  if (t_from > t_to) std::reverse(knots.begin(), knots.end());
  stations.insert(stations.end(), knots.begin(), knots.end());
  stations.push_back(t_to);

  Transform chain = Transform::identity();
  Transform prev = interpolate_at(stations.front());
  for (std::size_t i = 1; i < stations.size(); ++i) {
    const Transform next = interpolate_at(stations[i]);
    chain = compose(compose(invert(next), prev), chain);
    prev = next;
  }
  return chain;
}

Trajectory read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open pose file " + path.string());
  std::vector<TimedPose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto q = j.at("q").get<std::vector<double>>();
      const auto p = j.at("p").get<std::vector<double>>();
      if (q.size() != 4 || p.size() != 3) throw FormatError("bad vector length");
      const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
      if (std::abs(norm - 1.0) > 1e-6) throw FormatError("quaternion not normalized");
      TimedPose tp;
      tp.timestamp = j.at("t_us").get<Micros>();
      tp.pose = Transform::from_quaternion(Eigen::Quaterniond(q[0], q[1], q[2], q[3]), {p[0], p[1], p[2]});
      poses.push_back(tp);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    return Trajectory(std::move(poses));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pose_file(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write pose file " + path.string());
  for (const auto& tp : traj.poses()) {
    const Eigen::Quaterniond q = tp.pose.quaternion();
    nlohmann::json j;
    j["t_us"] = tp.timestamp;
    j["q"] = {q.w(), q.x(), q.y(), q.z()};
    j["p"] = {tp.pose.translation.x(), tp.pose.translation.y(), tp.pose.translation.z()};
    out << j.dump() << '\n';
  }
}

}  // namespace curb
