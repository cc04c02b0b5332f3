#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "curb/geometry.hpp"

namespace curb {

/// One LIDAR return. Axes follow the Transform convention; the sensor sits at
/// the origin of its own frame, so ground points have negative y.
struct LidarPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;

  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

struct LidarScan {
  Micros timestamp = 0;
  std::vector<LidarPoint> points;
};

struct TrimConfig {
  double max_below = 3.55;  // metres below the sensor
  double max_x_abs = 24.0;
  double max_z_abs = 48.0;

  void validate() const;
};

/// Keeps points with -max_below <= y <= 0, |x| <= max_x_abs, |z| <= max_z_abs.
/// Limits are inclusive and input order is preserved.
LidarScan trim_scan(const LidarScan& scan, const TrimConfig& cfg = {});

/// Maps every point of every scan into the sensor frame at `reference_t`.
/// The output keeps the scan order and point order of the inputs.
LidarScan integrate_scans(std::span<const LidarScan> scans, const Trajectory& traj, Micros reference_t);

/// Indices of the last `window` scans whose timestamp is <= `reference_t`.
/// `scans` must be sorted by timestamp.
std::vector<std::size_t> select_window(std::span<const LidarScan> scans, Micros reference_t,
                                       std::size_t window = 5);

/// Binary scan file: "LCRB", u32 version (1), u64 timestamp, u32 count,
/// then count * 4 little-endian f32 (x, y, z, intensity).
void write_scan(const std::filesystem::path& path, const LidarScan& scan);
LidarScan read_scan(const std::filesystem::path& path);

}  // namespace curb
