#include "curb/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curb/errors.hpp"

namespace curb {
namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

struct Flipped {
  std::vector<Point2> points;
  std::vector<bool> at_viewpoint;
};

Flipped spherical_flip(std::span<const Point2> pts, Point2 vp, double radius) {
  Flipped f;
  f.points.resize(pts.size());
  f.at_viewpoint.assign(pts.size(), false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i].x - vp.x;
    const double dz = pts[i].z - vp.z;
    const double r = std::hypot(dx, dz);
    if (r == 0.0) {
      f.at_viewpoint[i] = true;
      continue;
    }
    const double s = 1.0 + 2.0 * (radius - r) / r;
    f.points[i] = {dx * s, dz * s};
  }
  return f;
}

double max_distance(std::span<const Point2> pts, Point2 vp) {
  double m = 0.0;
  for (const auto& p : pts) m = std::max(m, std::hypot(p.x - vp.x, p.z - vp.z));
  return m;
}

// Strictly-inside test for a CCW convex polygon with >= 3 vertices.
bool strictly_inside(const std::vector<Point2>& poly, const Point2& q) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  const Point2& p0 = poly[0];
  if (cross(p0, poly[1], q) <= 0.0 || cross(p0, poly[n - 1], q) >= 0.0) return false;
  std::size_t lo = 1;
  std::size_t hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (cross(p0, poly[mid], q) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return cross(poly[lo], poly[lo + 1], q) > 0.0;
}

struct CellRay {
  int row;
  int col;
};

// Walks grid cells from the viewpoint cell to (target_row, target_col) and
// reports whether any obstacle cell strictly before the target is crossed.
bool ray_blocked(const CurbMask& obstacles, double u0, double v0, int start_row, int start_col, int target_row,
                 int target_col) {
  if (start_row == target_row && start_col == target_col) return false;
  const double du = target_col - u0;
  const double dv = target_row - v0;
  int col = start_col;
  int row = start_row;
  const int step_c = du > 0 ? 1 : (du < 0 ? -1 : 0);
  const int step_r = dv > 0 ? 1 : (dv < 0 ? -1 : 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Cell (r, c) spans [c - 0.5, c + 0.5] x [r - 0.5, r + 0.5].
  double t_max_c = step_c == 0 ? kInf : ((col + 0.5 * step_c) - u0) / du;
  double t_max_r = step_r == 0 ? kInf : ((row + 0.5 * step_r) - v0) / dv;
  const double t_delta_c = step_c == 0 ? kInf : std::abs(1.0 / du);
  const double t_delta_r = step_r == 0 ? kInf : std::abs(1.0 / dv);
  const int max_steps = std::abs(target_col - start_col) + std::abs(target_row - start_row) + 2;
  for (int i = 0; i < max_steps; ++i) {
    const double diff = t_max_c - t_max_r;
    if (std::abs(diff) <= 1e-12) {
      col += step_c;
      row += step_r;
      t_max_c += t_delta_c;
      t_max_r += t_delta_r;
    } else if (diff < 0.0) {
      col += step_c;
      t_max_c += t_delta_c;
    } else {
      row += step_r;
      t_max_r += t_delta_r;
    }
    if (row == target_row && col == target_col) return false;
    if (!obstacles.grid.inside(row, col)) return false;
    if (obstacles.at(row, col) > 0.5f) return true;
  }
  return false;
}

struct Viewpoint {
  double u;
  double v;
  int row;
  int col;
};

Viewpoint locate(const GridSpec& g, Point2 vp) {
  const Viewpoint out{g.u_of(vp.x), g.v_of(vp.z), g.row_of(vp.z), g.col_of(vp.x)};
  if (!g.inside(out.row, out.col)) throw OutOfRange("viewpoint outside grid");
  return out;
}

}  // namespace

void HeightBand::validate() const {
  if (!(lo < hi) || hi > 0.0) throw ConfigError("height band requires lo < hi <= 0");
}

CurbMask obstacle_mask(const LidarScan& cloud, const GridSpec& grid, const HeightBand& band) {
  CurbMask mask(grid);
  for (const auto& p : cloud.points) {
    if (p.y < band.lo || p.y > band.hi) continue;
    const int col = grid.col_of(p.x);
    const int row = grid.row_of(p.z);
    if (grid.inside(row, col)) mask.at(row, col) = 1.0f;
  }
  return mask;
}

std::vector<std::size_t> convex_hull(std::span<const Point2> pts) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && (pts[a].z < pts[b].z || (pts[a].z == pts[b].z && a < b)));
  });
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return pts[a].x == pts[b].x && pts[a].z == pts[b].z; }),
              order.end());
  if (order.size() < 3) return order;

  std::vector<std::size_t> hull(2 * order.size());
  std::size_t k = 0;
  for (std::size_t i : order) {
    while (k >= 2 && cross(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  const std::size_t lower = k + 1;
  for (std::size_t j = order.size() - 1; j-- > 0;) {
    const std::size_t i = order[j];
    while (k >= lower && cross(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<std::size_t> hpr_visible(std::span<const Point2> points, Point2 viewpoint, double gamma) {
  if (points.size() < 3) throw DegenerateInput("hidden point removal needs at least 3 points");
  if (!(gamma > 1.0)) throw DegenerateInput("gamma must exceed 1");

  // All points on one line through the viewpoint leave nothing to hull.
  bool collinear = true;
  for (std::size_t i = 0; i < points.size() && collinear; ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (std::abs(cross(viewpoint, points[i], points[j])) > 1e-12) {
        collinear = false;
        break;
      }
    }
  }
  if (collinear) throw DegenerateInput("all points collinear with the viewpoint");

  const double radius = gamma * max_distance(points, viewpoint);
  Flipped f = spherical_flip(points, viewpoint, radius);
  std::vector<Point2> cloud = f.points;
  cloud.push_back({0.0, 0.0});
  const std::size_t origin = cloud.size() - 1;
  const auto hull = convex_hull(cloud);

  std::vector<bool> on_hull(points.size(), false);
  for (std::size_t h : hull) {
    if (h != origin) on_hull[h] = true;
  }
  // Duplicates of a hull vertex share its visibility.
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool vis = on_hull[i] || f.at_viewpoint[i];
    if (!vis) {
      for (std::size_t h : hull) {
        if (h != origin && cloud[h].x == cloud[i].x && cloud[h].z == cloud[i].z) {
          vis = true;
          break;
        }
      }
    }
    if (vis) out.push_back(i);
  }
  return out;
}

std::vector<bool> hpr_query_visible(std::span<const Point2> occluders, std::span<const Point2> queries,
                                    Point2 viewpoint, double gamma) {
  if (!(gamma > 1.0)) throw DegenerateInput("gamma must exceed 1");
  std::vector<bool> visible(queries.size(), true);
  if (occluders.empty()) return visible;

  const double radius = gamma * std::max(max_distance(occluders, viewpoint), max_distance(queries, viewpoint));
  Flipped occ = spherical_flip(occluders, viewpoint, radius);
  std::vector<Point2> cloud;
  for (std::size_t i = 0; i < occ.points.size(); ++i) {
    if (!occ.at_viewpoint[i]) cloud.push_back(occ.points[i]);
  }
  cloud.push_back({0.0, 0.0});
  const auto hull_idx = convex_hull(cloud);
  if (hull_idx.size() < 3) return visible;
  std::vector<Point2> hull;
  hull.reserve(hull_idx.size());
  for (std::size_t h : hull_idx) hull.push_back(cloud[h]);

  Flipped q = spherical_flip(queries, viewpoint, radius);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (q.at_viewpoint[i]) continue;
    visible[i] = !strictly_inside(hull, q.points[i]);
  }
  return visible;
}

CurbMask shadow_mask(const CurbMask& obstacles, Point2 viewpoint) {
  const GridSpec& g = obstacles.grid;
  const Viewpoint vp = locate(g, viewpoint);
  CurbMask out(g);
  if (count_on(obstacles) == 0) return out;
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (ray_blocked(obstacles, vp.u, vp.v, vp.row, vp.col, r, c)) out.at(r, c) = 1.0f;
    }
  }
  return out;
}

VisibilityPartition partition_labels(const CurbMask& curb, const CurbMask& obstacles, Point2 viewpoint) {
  if (!(curb.grid == obstacles.grid)) throw GridMismatch("curb and obstacle grids differ");
  const GridSpec& g = curb.grid;
  const Viewpoint vp = locate(g, viewpoint);
  VisibilityPartition part{CurbMask(g), CurbMask(g)};
  const bool any_obstacle = count_on(obstacles) > 0;
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (!(curb.at(r, c) > 0.5f)) continue;
      // Same predicate as shadow_mask, evaluated only where labels exist.
      if (any_obstacle && ray_blocked(obstacles, vp.u, vp.v, vp.row, vp.col, r, c)) {
        part.occluded.at(r, c) = 1.0f;
      } else {
        part.visible.at(r, c) = 1.0f;
      }
    }
  }
  return part;
}

}  // namespace curb
