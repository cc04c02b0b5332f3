#include "curb/anchor_codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "curb/errors.hpp"

namespace curb {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kMinEigenRatio = 1.2;
constexpr std::size_t kMinPixels = 3;

double snap(double deg) { return std::round(deg * 1e9) / 1e9; }

// Whether the fitted line passes through the cell rectangle.
bool crosses_cell(const LineFit& fit, double center_row, double center_col, int cell, int gr, int gc) {
  const double t = fit.angle_deg * kDeg;
  const double dc = std::cos(t), dr = -std::sin(t);
  const double pc = center_col - fit.signed_distance * std::sin(t);
  const double pr = center_row - fit.signed_distance * std::cos(t);
  double c0 = pc - 2.0 * cell * dc, r0 = pr - 2.0 * cell * dr;
  double c1 = pc + 2.0 * cell * dc, r1 = pr + 2.0 * cell * dr;
  const double lo_c = gc * cell - 0.5, lo_r = gr * cell - 0.5;
  return clip_segment(c0, r0, c1, r1, lo_c, lo_c + cell, lo_r, lo_r + cell);
}

}  // namespace

void AnchorSpec::validate() const {
  if (cell_sizes.empty()) throw ConfigError("anchor spec needs at least one scale");
  for (int s : cell_sizes) {
    if (s < 2) throw ConfigError("anchor cell size must be >= 2");
  }
  if (!(fit_margin >= 0.0 && fit_margin <= 1.0)) throw ConfigError("fit_margin must lie in [0, 1]");
}

std::optional<LineFit> fit_cell_line(std::span<const PixelPoint> pixels, PixelPoint cell_center) {
  if (pixels.size() < kMinPixels) return std::nullopt;
  // Work in (X, Y) = (col, -row) so angles run counter-clockwise.
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : pixels) {
    mx += p.col;
    my -= p.row;
  }
  const double n = static_cast<double>(pixels.size());
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : pixels) {
    const double dx = p.col - mx;
    const double dy = -p.row - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double half_trace = 0.5 * (sxx + syy);
  const double disc = std::hypot(0.5 * (sxx - syy), sxy);
  const double l_max = half_trace + disc;
  const double l_min = half_trace - disc;
  if (l_max <= 0.0) return std::nullopt;
  if (l_min > 0.0 && l_max / l_min < kMinEigenRatio) return std::nullopt;

  double angle = snap(0.5 * std::atan2(2.0 * sxy, sxx - syy) / kDeg);
  if (angle < 0.0) angle += 180.0;
  if (angle >= 180.0) angle -= 180.0;

  const double t = angle * kDeg;
  const double nx = -std::sin(t);
  const double ny = std::cos(t);
  const double dist = nx * (mx - cell_center.col) + ny * (my + cell_center.row);
  return LineFit{angle, dist};
}

AnchorAssignment assign_anchor(double angle_deg) {
  AnchorAssignment a;
  if (angle_deg <= 0.0) {
    a.category = kAnchorCount - 1;
    a.wrapped = true;
    a.omega_deg = angle_deg + 180.0 - kAnchorAnglesDeg[kAnchorCount - 1];
    return a;
  }
  const int k = std::clamp(static_cast<int>(std::ceil(angle_deg / (2.0 * kOmegaLimitDeg))) - 1, 0, kAnchorCount - 1);
  a.category = k;
  a.omega_deg = angle_deg - kAnchorAnglesDeg[k];
  return a;
}

AnchorGridSet encode_mask(const CurbMask& mask, const AnchorSpec& spec) {
  spec.validate();
  AnchorGridSet out;
  out.image = mask.grid;
  std::vector<PixelPoint> pts;
  for (int cell : spec.cell_sizes) {
    const int rows = (mask.height() + cell - 1) / cell;
    const int cols = (mask.width() + cell - 1) / cell;
    AnchorGrid grid(cell, rows, cols);
    for (int gr = 0; gr < rows; ++gr) {
      for (int gc = 0; gc < cols; ++gc) {
        pts.clear();
        const int margin = static_cast<int>(std::lround(spec.fit_margin * cell));
        const int r_lo = std::max(0, gr * cell - margin);
        const int c_lo = std::max(0, gc * cell - margin);
        const int r_end = std::min(mask.height(), (gr + 1) * cell + margin);
        const int c_end = std::min(mask.width(), (gc + 1) * cell + margin);
        std::size_t own = 0;
        for (int r = r_lo; r < r_end; ++r) {
          for (int c = c_lo; c < c_end; ++c) {
            if (mask.at(r, c) <= 0.5f) continue;
            pts.push_back({static_cast<double>(r), static_cast<double>(c)});
            if (r >= gr * cell && r < (gr + 1) * cell && c >= gc * cell && c < (gc + 1) * cell) ++own;
          }
        }
        if (own < 3) continue;
        const auto fit = fit_cell_line(pts, {grid.center_row(gr), grid.center_col(gc)});
        if (!fit) continue;
        if (!crosses_cell(*fit, grid.center_row(gr), grid.center_col(gc), cell, gr, gc)) continue;
        const AnchorAssignment a = assign_anchor(fit->angle_deg);
        AnchorCell& out_cell = grid.at(gr, gc);
        out_cell.presence[a.category] = 1.0f;
        out_cell.mask[a.category] = 1.0f;
        out_cell.omega[a.category] = static_cast<float>(a.omega_deg * kDeg);
        out_cell.beta[a.category] = static_cast<float>(a.wrapped ? -fit->signed_distance : fit->signed_distance);
      }
    }
    out.scales.push_back(std::move(grid));
  }
  return out;
}

CurbMask decode_grids(const AnchorGridSet& grids, float presence_threshold) {
  CurbMask out(grids.image);
  // Coarse first so the finest scale is rasterized last.
  std::vector<const AnchorGrid*> order;
  for (const auto& g : grids.scales) order.push_back(&g);
  std::sort(order.begin(), order.end(), [](const AnchorGrid* a, const AnchorGrid* b) { return a->cell_px > b->cell_px; });

  constexpr double kInset = 1e-6;
  for (const AnchorGrid* g : order) {
    const int s = g->cell_px;
    for (int gr = 0; gr < g->rows; ++gr) {
      for (int gc = 0; gc < g->cols; ++gc) {
        const AnchorCell& cell = g->at(gr, gc);
        for (int k = 0; k < kAnchorCount; ++k) {
          if (!(cell.presence[k] >= presence_threshold)) continue;
          const double t = kAnchorAnglesDeg[k] * kDeg + cell.omega[k];
          // Direction and normal expressed in (col, row).
          const double dc = std::cos(t);
          const double dr = -std::sin(t);
          const double nc = -std::sin(t);
          const double nr = -std::cos(t);
          const double pc = g->center_col(gc) + cell.beta[k] * nc;
          const double pr = g->center_row(gr) + cell.beta[k] * nr;
          const double reach = 2.0 * s;
          double c0 = pc - reach * dc;
          double r0 = pr - reach * dr;
          double c1 = pc + reach * dc;
          double r1 = pr + reach * dr;
          const double lo_c = gc * s - 0.5 + kInset;
          const double lo_r = gr * s - 0.5 + kInset;
          if (!clip_segment(c0, r0, c1, r1, lo_c, lo_c + s - 2 * kInset, lo_r, lo_r + s - 2 * kInset)) continue;
          draw_segment(out, c0, r0, c1, r1);
        }
      }
    }
  }
  return out;
}

void check_encoding(const AnchorGridSet& grids) {
  const double omega_lim = kOmegaLimitDeg * kDeg;
  for (const auto& g : grids.scales) {
    const double half_diag = 0.5 * std::sqrt(2.0) * g.cell_px;
    for (const auto& cell : g.cells) {
      int active = 0;
      for (int k = 0; k < kAnchorCount; ++k) {
        if (cell.presence[k] > 0.5f) {
          ++active;
          if (!(cell.omega[k] > -omega_lim + 1e-7 && cell.omega[k] <= omega_lim + 1e-7)) {
            throw std::logic_error("omega out of range");
          }
          if (std::abs(cell.beta[k]) > half_diag + 1e-6) throw std::logic_error("beta out of range");
        }
      }
      if (active > 1) throw std::logic_error("more than one active category in a cell");
    }
  }
}

void write_anchor_grids(const std::filesystem::path& path, const AnchorGridSet& grids) {
  nlohmann::json j;
  j["image"] = {{"width", grids.image.width}, {"height", grids.image.height}, {"resolution_m", grids.image.resolution}};
  j["scales"] = nlohmann::json::array();
  for (const auto& g : grids.scales) {
    std::vector<float> flat;
    flat.reserve(g.cells.size() * 16);
    for (const auto& c : g.cells) {
      flat.insert(flat.end(), c.presence.begin(), c.presence.end());
      flat.insert(flat.end(), c.omega.begin(), c.omega.end());
      flat.insert(flat.end(), c.beta.begin(), c.beta.end());
      flat.insert(flat.end(), c.mask.begin(), c.mask.end());
    }
    j["scales"].push_back({{"scale_px", g.cell_px}, {"rows", g.rows}, {"cols", g.cols}, {"cells", flat}});
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump() << '\n';
}

AnchorGridSet read_anchor_grids(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    AnchorGridSet out;
    const auto& im = j.at("image");
    out.image = {im.at("width").get<int>(), im.at("height").get<int>(), im.at("resolution_m").get<double>()};
    for (const auto& s : j.at("scales")) {
      AnchorGrid g(s.at("scale_px").get<int>(), s.at("rows").get<int>(), s.at("cols").get<int>());
      const auto flat = s.at("cells").get<std::vector<float>>();
      if (flat.size() != g.cells.size() * 16) throw FormatError("anchor grid cell count mismatch");
      for (std::size_t i = 0; i < g.cells.size(); ++i) {
        for (int k = 0; k < kAnchorCount; ++k) {
          g.cells[i].presence[k] = flat[i * 16 + k];
          g.cells[i].omega[k] = flat[i * 16 + 4 + k];
          g.cells[i].beta[k] = flat[i * 16 + 8 + k];
          g.cells[i].mask[k] = flat[i * 16 + 12 + k];
        }
      }
      out.scales.push_back(std::move(g));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace curb
