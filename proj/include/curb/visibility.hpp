#pragma once

#include <span>
#include <vector>

#include "curb/bev.hpp"
#include "curb/pointcloud.hpp"

namespace curb {

/// Height band in sensor-frame y, metres. lo < hi <= 0.
struct HeightBand {
  double lo = -1.5;
  double hi = -0.5;
  void validate() const;
};

/// Binary raster marking cells that hold a return inside the height band.
CurbMask obstacle_mask(const LidarScan& cloud, const GridSpec& grid, const HeightBand& band = {});

/// Hidden point removal in the ground plane.
///
/// Each point is spherically flipped about `viewpoint` with radius
/// gamma * max distance; the convex hull of the flipped set plus the viewpoint
/// is taken, and hull vertices are reported visible. Returns sorted indices.
/// Points coincident with the viewpoint are reported visible.
/// Throws DegenerateInput for fewer than 3 points, gamma <= 1, or when every
/// point lies on one line through the viewpoint.
std::vector<std::size_t> hpr_visible(std::span<const Point2> points, Point2 viewpoint, double gamma = 100.0);

/// Visibility of `queries` against a fixed occluder set: a query is visible
/// when its flipped image lies on or outside the hull of the flipped
/// occluders plus the viewpoint. Equivalent to running hpr_visible on
/// occluders + {query} one query at a time.
std::vector<bool> hpr_query_visible(std::span<const Point2> occluders, std::span<const Point2> queries,
                                    Point2 viewpoint, double gamma = 100.0);

/// Cells whose centre is hidden from `viewpoint` (metres, sensor frame) by an
/// obstacle cell strictly closer along the grid ray. Obstacle cells themselves
/// are not shadowed by their own occupancy; the viewpoint cell never occludes.
CurbMask shadow_mask(const CurbMask& obstacles, Point2 viewpoint = {});

struct VisibilityPartition {
  CurbMask visible;
  CurbMask occluded;
};

/// occluded = curb & shadow(obstacles), visible = curb \ occluded.
VisibilityPartition partition_labels(const CurbMask& curb, const CurbMask& obstacles, Point2 viewpoint = {});

/// Convex hull by monotone chain; returns indices of strict hull vertices in
/// counter-clockwise order.
std::vector<std::size_t> convex_hull(std::span<const Point2> pts);

}  // namespace curb
