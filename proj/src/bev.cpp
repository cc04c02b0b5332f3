#include "curb/bev.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "curb/errors.hpp"

namespace curb {
namespace {

void require_same_grid(const CurbMask& a, const CurbMask& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("mask grids differ");
}

}  // namespace

bool clip_segment(double& x0, double& y0, double& x1, double& y1, double lo_x, double hi_x, double lo_y,
                  double hi_y) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - lo_x, hi_x - x0, y0 - lo_y, hi_y - y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
  }
  const double nx0 = x0 + t0 * dx;
  const double ny0 = y0 + t0 * dy;
  x1 = x0 + t1 * dx;
  y1 = y0 + t1 * dy;
  x0 = nx0;
  y0 = ny0;
  return true;
}

int GridSpec::col_of(double x) const { return static_cast<int>(std::floor((x - x_min()) / resolution)); }
int GridSpec::row_of(double z) const { return static_cast<int>(std::floor((z_max() - z) / resolution)); }

void GridSpec::validate() const {
  if (width <= 0 || height <= 0 || !(resolution > 0.0)) throw ConfigError("grid dimensions must be positive");
}

BevImage::BevImage(const GridSpec& g) : grid(g), data(static_cast<std::size_t>(kChannels) * g.pixels(), 0.0f) {
  range_scale = std::hypot(-g.x_min(), g.z_max());
}

BevImage rasterize_cloud(const LidarScan& cloud, const GridSpec& grid, double max_below) {
  BevImage img(grid);
  img.height_floor = max_below;
  img.height_scale = max_below;
  std::vector<float> best_y(grid.pixels(), -std::numeric_limits<float>::infinity());
  std::vector<std::int32_t> best(grid.pixels(), -1);

  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    const int col = grid.col_of(p.x);
    const int row = grid.row_of(p.z);
    if (!grid.inside(row, col)) continue;
    const std::size_t cell = static_cast<std::size_t>(row) * grid.width + col;
    if (p.y > best_y[cell]) {
      best_y[cell] = p.y;
      best[cell] = static_cast<std::int32_t>(i);
    }
  }

  const auto clamp01 = [](double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); };
  const std::size_t n = grid.pixels();
  for (std::size_t cell = 0; cell < n; ++cell) {
    if (best[cell] < 0) continue;
    const auto& p = cloud.points[static_cast<std::size_t>(best[cell])];
    img.data[cell] = clamp01(std::hypot(static_cast<double>(p.x), static_cast<double>(p.z)) / img.range_scale);
    img.data[n + cell] = clamp01(p.intensity);
    img.data[2 * n + cell] = clamp01((p.y + max_below) / max_below);
  }
  return img;
}

void draw_segment(CurbMask& mask, double c0, double r0, double c1, double r1, float value) {
  const GridSpec& g = mask.grid;
  if (!clip_segment(c0, r0, c1, r1, -0.5, g.width - 0.5, -0.5, g.height - 0.5)) return;
  int x0 = static_cast<int>(std::lround(c0));
  int y0 = static_cast<int>(std::lround(r0));
  const int x1 = static_cast<int>(std::lround(c1));
  const int y1 = static_cast<int>(std::lround(r1));
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    if (g.inside(y0, x0)) mask.at(y0, x0) = std::max(mask.at(y0, x0), value);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

CurbMask rasterize_polylines(std::span<const Polyline> polylines, const GridSpec& grid, int thickness_px) {
  if (thickness_px < 1) throw ConfigError("thickness_px must be >= 1");
  CurbMask mask(grid);
  for (const auto& line : polylines) {
    if (line.size() == 1) {
      draw_segment(mask, grid.u_of(line[0].x), grid.v_of(line[0].z), grid.u_of(line[0].x), grid.v_of(line[0].z));
    }
    for (std::size_t i = 1; i < line.size(); ++i) {
      draw_segment(mask, grid.u_of(line[i - 1].x), grid.v_of(line[i - 1].z), grid.u_of(line[i].x),
                   grid.v_of(line[i].z));
    }
  }
  if (thickness_px == 1) return mask;

  // Square element of side `thickness_px`; even sides extend one extra pixel
  // towards +row/+col.
  const int lo = (thickness_px - 1) / 2;
  const int hi = thickness_px / 2;
  CurbMask out(grid);
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      if (mask.at(r, c) <= 0.0f) continue;
      for (int dr = -lo; dr <= hi; ++dr) {
        for (int dc = -lo; dc <= hi; ++dc) {
          if (grid.inside(r + dr, c + dc)) out.at(r + dr, c + dc) = 1.0f;
        }
      }
    }
  }
  return out;
}

CurbMask warp_mask(const CurbMask& mask, const Transform& motion) {
  const GridSpec& g = mask.grid;
  const PlanarMotion m = to_planar(motion);
  CurbMask out(g);
  if (m.yaw == 0.0 && m.tx == 0.0 && m.tz == 0.0) return mask;
  const double c = std::cos(m.yaw);
  const double s = std::sin(m.yaw);

  // Output point q maps back to source p = Ry(-yaw) (q - t).
  for (int r = 0; r < g.height; ++r) {
    const double qz = g.z_of(r) - m.tz;
    for (int col = 0; col < g.width; ++col) {
      const double qx = g.x_of(col) - m.tx;
      const double px = c * qx - s * qz;
      const double pz = s * qx + c * qz;
      const int sc = static_cast<int>(std::floor(g.u_of(px) + 0.5));
      const int sr = static_cast<int>(std::floor(g.v_of(pz) + 0.5));
      if (g.inside(sr, sc)) out.at(r, col) = mask.at(sr, sc);
    }
  }
  return out;
}

CurbMask dilate(const CurbMask& mask, int radius_px) {
  if (radius_px < 0) throw ConfigError("dilation radius must be >= 0");
  if (radius_px == 0) return mask;
  const GridSpec& g = mask.grid;
  CurbMask tmp(g);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      float v = 0.0f;
      const int c_lo = std::max(0, c - radius_px);
      const int c_hi = std::min(g.width - 1, c + radius_px);
      for (int k = c_lo; k <= c_hi; ++k) v = std::max(v, mask.at(r, k));
      tmp.at(r, c) = v;
    }
  }
  CurbMask out(g);
  for (int r = 0; r < g.height; ++r) {
    const int r_lo = std::max(0, r - radius_px);
    const int r_hi = std::min(g.height - 1, r + radius_px);
    for (int c = 0; c < g.width; ++c) {
      float v = 0.0f;
      for (int k = r_lo; k <= r_hi; ++k) v = std::max(v, tmp.at(k, c));
      out.at(r, c) = v;
    }
  }
  return out;
}

CurbMask threshold(const CurbMask& mask, float t, bool strict) {
  CurbMask out(mask.grid);
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    const float v = mask.values[i];
    out.values[i] = (strict ? v > t : v >= t) ? 1.0f : 0.0f;
  }
  return out;
}

CurbMask mask_union(const CurbMask& a, const CurbMask& b) {
  require_same_grid(a, b);
  CurbMask out(a.grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = (a.values[i] > 0.5f || b.values[i] > 0.5f) ? 1.0f : 0.0f;
  return out;
}

CurbMask mask_intersection(const CurbMask& a, const CurbMask& b) {
  require_same_grid(a, b);
  CurbMask out(a.grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = (a.values[i] > 0.5f && b.values[i] > 0.5f) ? 1.0f : 0.0f;
  return out;
}

CurbMask mask_difference(const CurbMask& a, const CurbMask& b) {
  require_same_grid(a, b);
  CurbMask out(a.grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = (a.values[i] > 0.5f && !(b.values[i] > 0.5f)) ? 1.0f : 0.0f;
  return out;
}

CurbMask mask_max(const CurbMask& a, const CurbMask& b) {
  require_same_grid(a, b);
  CurbMask out(a.grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = std::max(a.values[i], b.values[i]);
  return out;
}

std::size_t count_on(const CurbMask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.values.begin(), mask.values.end(), [](float v) { return v > 0.5f; }));
}

bool is_subset(const CurbMask& inner, const CurbMask& outer) {
  require_same_grid(inner, outer);
  for (std::size_t i = 0; i < inner.values.size(); ++i) {
    if (inner.values[i] > 0.5f && !(outer.values[i] > 0.5f)) return false;
  }
  return true;
}

void write_pgm(const std::filesystem::path& path, const CurbMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "P5\n" << mask.grid.width << ' ' << mask.grid.height << "\n255\n";
  std::vector<unsigned char> bytes(mask.values.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(mask.values[i], 0.0f, 1.0f)));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

CurbMask read_pgm(const std::filesystem::path& path, double resolution) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  auto token = [&]() {
    std::string t;
    while (in) {
      const int ch = in.peek();
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    in >> t;
    return t;
  };
  if (token() != "P5") throw FormatError("not a P5 PGM: " + path.string());
  const int w = std::stoi(token());
  const int h = std::stoi(token());
  const int maxval = std::stoi(token());
  in.get();
  if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("unsupported PGM header in " + path.string());
  GridSpec g{w, h, resolution};
  CurbMask mask(g);
  std::vector<unsigned char> bytes(g.pixels());
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw FormatError("truncated PGM " + path.string());
  for (std::size_t i = 0; i < bytes.size(); ++i) mask.values[i] = static_cast<float>(bytes[i]) / 255.0f;
  return mask;
}

void write_bev(const std::filesystem::path& path, const BevImage& img) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size() * sizeof(float)));
  }
  nlohmann::json side;
  side["width"] = img.grid.width;
  side["height"] = img.grid.height;
  side["channels"] = BevImage::kChannels;
  side["resolution_m"] = img.grid.resolution;
  side["channel_names"] = {"range", "intensity", "height"};
  side["range_scale_m"] = img.range_scale;
  side["height_floor_m"] = img.height_floor;
  side["height_scale_m"] = img.height_scale;
  std::ofstream meta(path.string() + ".json");
  meta << side.dump(2) << '\n';
}

BevImage read_bev(const std::filesystem::path& path) {
  std::ifstream meta(path.string() + ".json");
  if (!meta) throw FormatError("missing BEV sidecar for " + path.string());
  nlohmann::json side;
  try {
    meta >> side;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad BEV sidecar: ") + e.what());
  }
  if (side.value("channels", 0) != BevImage::kChannels) throw FormatError("BEV sidecar channel count must be 3");
  GridSpec g{side.at("width").get<int>(), side.at("height").get<int>(), side.at("resolution_m").get<double>()};
  BevImage img(g);
  img.range_scale = side.value("range_scale_m", img.range_scale);
  img.height_floor = side.value("height_floor_m", img.height_floor);
  img.height_scale = side.value("height_scale_m", img.height_scale);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size() * sizeof(float)));
  if (!in) throw FormatError("truncated BEV raster " + path.string());
  return img;
}

}  // namespace curb
