#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "curb/bev.hpp"

namespace curb {

inline constexpr int kAnchorCount = 4;
/// Anchor orientations in degrees. Angles are measured in the image plane
/// from +col towards -row (x right, forward up), folded to [0, 180).
inline constexpr std::array<double, kAnchorCount> kAnchorAnglesDeg = {22.5, 67.5, 112.5, 157.5};
/// Half the spacing between anchors; omega lives in (-22.5, 22.5] degrees.
inline constexpr double kOmegaLimitDeg = 22.5;

struct AnchorSpec {
  std::vector<int> cell_sizes = {8, 16, 32};
  /// Line parameters are fitted on the cell grown by this fraction of the
  /// cell size on every side; presence still needs 3 pixels inside the cell.
  double fit_margin = 0.125;
  void validate() const;
};

/// Per-cell parameters for the four anchor categories. omega in radians,
/// beta in pixels along the normal of the line direction (direction rotated
/// +90 degrees), mask is the loss weight (1 where a line was fitted).
struct AnchorCell {
  std::array<float, kAnchorCount> presence{};
  std::array<float, kAnchorCount> omega{};
  std::array<float, kAnchorCount> beta{};
  std::array<float, kAnchorCount> mask{};
};

struct AnchorGrid {
  int cell_px = 8;
  int rows = 0;
  int cols = 0;
  std::vector<AnchorCell> cells;

  AnchorGrid() = default;
  AnchorGrid(int cell, int r, int c) : cell_px(cell), rows(r), cols(c), cells(static_cast<std::size_t>(r) * c) {}
  AnchorCell& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }
  const AnchorCell& at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
  /// Cell centre in continuous pixel coordinates (row, col).
  double center_row(int r) const { return r * cell_px + 0.5 * (cell_px - 1); }
  double center_col(int c) const { return c * cell_px + 0.5 * (cell_px - 1); }
};

struct AnchorGridSet {
  GridSpec image;  // raster the grids were derived from
  std::vector<AnchorGrid> scales;
};

struct PixelPoint {
  double row = 0.0;
  double col = 0.0;
};

struct LineFit {
  double angle_deg = 0.0;        // folded to [0, 180)
  double signed_distance = 0.0;  // along the normal of angle_deg, from the cell centre
};

/// Total-least-squares line through `pixels`. Returns nothing for fewer than
/// 3 points or when the scatter is isotropic (eigenvalue ratio below 1.2).
std::optional<LineFit> fit_cell_line(std::span<const PixelPoint> pixels, PixelPoint cell_center);

/// Anchor category and omega (degrees) for a folded line angle.
/// Categories partition the circle so omega always falls in (-22.5, 22.5].
struct AnchorAssignment {
  int category = 0;
  double omega_deg = 0.0;
  bool wrapped = false;  // angle was taken as angle + 180 to reach the anchor
};
AnchorAssignment assign_anchor(double angle_deg);

AnchorGridSet encode_mask(const CurbMask& mask, const AnchorSpec& spec = {});

/// Renders every category with presence >= threshold as a 1-px segment
/// clipped to its cell. Scales are drawn coarse to fine.
CurbMask decode_grids(const AnchorGridSet& grids, float presence_threshold = 0.5f);

/// Checks the encoder invariants (one active category per cell, omega and
/// beta ranges); throws std::logic_error on violation.
void check_encoding(const AnchorGridSet& grids);

void write_anchor_grids(const std::filesystem::path& path, const AnchorGridSet& grids);
AnchorGridSet read_anchor_grids(const std::filesystem::path& path);

}  // namespace curb
