#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "curb/geometry.hpp"
#include "curb/pointcloud.hpp"

namespace curb {

/// Metric raster centred on the sensor. Column 0 is the leftmost x, row 0 is
/// the farthest forward z. Default: 480 x 960 px at 0.1 m/px, i.e.
/// x in [-24, 24] m and z in [-48, 48] m.
struct GridSpec {
  int width = 480;
  int height = 960;
  double resolution = 0.1;

  double x_min() const { return -0.5 * width * resolution; }
  double z_max() const { return 0.5 * height * resolution; }
  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool inside(int row, int col) const { return row >= 0 && col >= 0 && row < height && col < width; }

  /// Cell containing a metric point; may lie outside the grid.
  int col_of(double x) const;
  int row_of(double z) const;
  /// Continuous pixel coordinates, integer at cell centres.
  double u_of(double x) const { return (x - x_min()) / resolution - 0.5; }
  double v_of(double z) const { return (z_max() - z) / resolution - 0.5; }
  double x_of(double col) const { return x_min() + (col + 0.5) * resolution; }
  double z_of(double row) const { return z_max() - (row + 0.5) * resolution; }

  void validate() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Single-channel raster in [0, 1]. Binary masks hold exactly 0 or 1.
struct CurbMask {
  GridSpec grid;
  std::vector<float> values;

  CurbMask() = default;
  explicit CurbMask(const GridSpec& g, float fill = 0.0f) : grid(g), values(g.pixels(), fill) {}

  float& at(int row, int col) { return values[static_cast<std::size_t>(row) * grid.width + col]; }
  float at(int row, int col) const { return values[static_cast<std::size_t>(row) * grid.width + col]; }
  int width() const { return grid.width; }
  int height() const { return grid.height; }

  friend bool operator==(const CurbMask&, const CurbMask&) = default;
};

/// 3-plane bird's-eye view image, stored normalized to [0, 1]:
/// range / range_scale, intensity, (y + height_floor) / height_scale.
struct BevImage {
  static constexpr int kChannels = 3;

  GridSpec grid;
  std::vector<float> data;  // plane-major: channel, row, col
  double range_scale = 1.0;
  double height_floor = 3.55;
  double height_scale = 3.55;

  BevImage() = default;
  explicit BevImage(const GridSpec& g);

  float& at(int ch, int row, int col) { return data[(static_cast<std::size_t>(ch) * grid.height + row) * grid.width + col]; }
  float at(int ch, int row, int col) const { return data[(static_cast<std::size_t>(ch) * grid.height + row) * grid.width + col]; }
  std::span<const float> plane(int ch) const { return {data.data() + ch * grid.pixels(), grid.pixels()}; }
};

struct Point2 {
  double x = 0.0;
  double z = 0.0;
};
using Polyline = std::vector<Point2>;

/// Max-height aggregation per cell. `max_below` sets the height normalization.
BevImage rasterize_cloud(const LidarScan& cloud, const GridSpec& grid, double max_below = 3.55);

/// Bresenham rasterization of metric polylines, thickened to `thickness_px`.
CurbMask rasterize_polylines(std::span<const Polyline> polylines, const GridSpec& grid, int thickness_px = 1);

/// Liang-Barsky clip of a segment against an axis-aligned box; false when the
/// segment misses the box entirely.
bool clip_segment(double& x0, double& y0, double& x1, double& y1, double lo_x, double hi_x, double lo_y,
                  double hi_y);

/// Draws a segment given in continuous pixel coordinates (col, row).
void draw_segment(CurbMask& mask, double c0, double r0, double c1, double r1, float value = 1.0f);

/// Resamples `mask` into the frame reached by `motion`, where `motion` maps
/// points of the mask's frame into the output frame. Nearest-neighbour,
/// zero outside the source.
CurbMask warp_mask(const CurbMask& mask, const Transform& motion);

/// Grey-level dilation with a (2r+1) x (2r+1) square.
CurbMask dilate(const CurbMask& mask, int radius_px);

// Mask algebra on binary rasters. Grids must match.
CurbMask threshold(const CurbMask& mask, float t, bool strict = false);
CurbMask mask_union(const CurbMask& a, const CurbMask& b);
CurbMask mask_intersection(const CurbMask& a, const CurbMask& b);
CurbMask mask_difference(const CurbMask& a, const CurbMask& b);
CurbMask mask_max(const CurbMask& a, const CurbMask& b);
std::size_t count_on(const CurbMask& mask);
/// true when every set pixel of `inner` is also set in `outer`.
bool is_subset(const CurbMask& inner, const CurbMask& outer);

/// 8-bit binary PGM (P5), value = round(255 p).
void write_pgm(const std::filesystem::path& path, const CurbMask& mask);
/// Reads a P5 image; `resolution` is not stored in PGM and must be supplied.
CurbMask read_pgm(const std::filesystem::path& path, double resolution = 0.1);

/// Raw little-endian f32 planes plus `<path>.json` sidecar.
void write_bev(const std::filesystem::path& path, const BevImage& img);
BevImage read_bev(const std::filesystem::path& path);

}  // namespace curb
