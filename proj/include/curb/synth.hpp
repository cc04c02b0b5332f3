#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <cmath>
#include <string>
#include <vector>

#include "curb/bev.hpp"
#include "curb/geometry.hpp"
#include "curb/pointcloud.hpp"

namespace curb {

/// Road whose centreline starts at the world origin heading +z and bends with
/// constant curvature (positive turns toward +x). Curbs sit at +-width/2.
struct RoadSpec {
  double curvature = 0.0;  // 1/m
  double width = 8.0;
  double curb_height = 0.12;
  double s_begin = -60.0;  // arc-length extent of the curb polylines
  double s_end = 160.0;

  Point2 centre(double s) const;
  double heading(double s) const;  // yaw about +y
  /// Signed offset to the right of the centreline (exact for the full arc).
  double lateral(double x, double z) const;
  /// Arc-length coordinate of the closest centreline point.
  double station(double x, double z) const;
  bool on_sidewalk(double x, double z) const { return std::abs(lateral(x, z)) >= 0.5 * width; }
};

enum class ObstacleKind { Car, Van, Bin, Cone };

/// Upright box resting on the surface below it, yawed with the road.
struct Obstacle {
  ObstacleKind kind = ObstacleKind::Car;
  double cx = 0.0;
  double cz = 0.0;
  double yaw = 0.0;
  double length = 4.5;  // along the yaw direction
  double width = 1.8;
  double height = 1.5;
  double base_y = 0.0;

  /// Four corners in world x/z, counter-clockwise seen from above.
  std::vector<Point2> footprint() const;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  RoadSpec road;
  std::vector<Polyline> curbs;  // world x/z, left then right
  std::vector<Obstacle> obstacles;
};

struct SceneConfig {
  int max_obstacles = 6;
  double obstacle_s_min = -10.0;
  double obstacle_s_max = 50.0;
  double straight_probability = 0.4;
  double min_radius = 80.0;
  double max_radius = 400.0;
  double min_width = 7.0;
  double max_width = 10.0;
  double curb_sample_step = 0.5;
};

SceneSpec generate_scene(std::uint64_t seed, const SceneConfig& cfg = {});

std::string scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const std::string& text);

struct BeamConfig {
  int rings = 32;
  double elevation_min_deg = -25.0;
  double elevation_max_deg = 15.0;
  double azimuth_step_deg = 0.4;
  double max_range = 100.0;
  double range_noise_sigma = 0.02;
  double intensity_noise = 0.05;
  double sensor_height = 2.0;

  void validate() const;
};

enum class Material { Road, Curb, Obstacle };

struct RayHit {
  double range = 0.0;
  Material material = Material::Road;
};

/// Nearest surface hit along a world-frame ray, or none within `max_range`.
std::optional<RayHit> cast_ray(const SceneSpec& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                               double max_range);

/// Pose of the sensor (sensor frame -> world) at arc length `s` on the centreline.
Transform sensor_pose_at(const RoadSpec& road, double s, double sensor_height);

/// Points are in the sensor frame.
LidarScan simulate_scan(const SceneSpec& scene, const Transform& sensor_pose, const BeamConfig& beams,
                        std::uint64_t seed, Micros timestamp = 0);

struct LabelSet {
  CurbMask curb;
  CurbMask visible;
  CurbMask occluded;
};

/// Curb rasterization split by 2D ray casting from the sensor against the
/// obstacle footprints.
LabelSet ground_truth_labels(const SceneSpec& scene, const Transform& sensor_pose, const GridSpec& grid);

/// Footprints of the scene obstacles expressed in the sensor frame.
std::vector<std::vector<Point2>> footprints_in_sensor(const SceneSpec& scene, const Transform& sensor_pose);

struct SequenceConfig {
  int n_frames = 30;
  double speed = 10.0;     // m/s
  double scan_rate = 10.0;  // Hz
  double pose_rate = 16.0;  // Hz
  double s_start = 0.0;
  GridSpec grid;
  BeamConfig beams;
};

struct Sequence {
  SceneSpec scene;
  SequenceConfig config;
  std::uint64_t seed = 0;
  std::vector<LidarScan> scans;
  Trajectory trajectory;
  std::vector<LabelSet> labels;  // per scan, in that scan's sensor frame
};

Sequence generate_sequence(const SceneSpec& scene, const SequenceConfig& cfg, std::uint64_t seed);

/// scans/NNNN.lcrb, poses.jsonl, labels/NNNN.{curb,visible,occluded}.pgm,
/// scene.json, meta.json.
void write_sequence(const std::filesystem::path& dir, const Sequence& seq);
/// Reads scans, poses and labels back; the scene is read when present.
Sequence read_sequence(const std::filesystem::path& dir);

struct AugmentParams {
  bool mirror = false;
  int shift_col = 0;
  int shift_row = 0;
  double rotate_deg = 0.0;

  bool is_identity() const { return !mirror && shift_col == 0 && shift_row == 0 && rotate_deg == 0.0; }
};

struct AugmentConfig {
  int max_shift_px = 16;
  double max_rotate_deg = 5.0;
};

AugmentParams draw_augment(std::uint64_t seed, const AugmentConfig& cfg = {});

/// Mirror about the vertical centre line, then rotate about the image centre,
/// then translate. Nearest-neighbour; uncovered pixels become zero.
void apply_augment(const AugmentParams& p, BevImage& bev, std::vector<CurbMask*> masks);

void augment(BevImage& bev, std::vector<CurbMask*> masks, std::uint64_t seed, const AugmentConfig& cfg = {});

}  // namespace curb
