#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "curb/bev.hpp"

namespace curb {

/// Exact squared Euclidean distance (in pixels^2) from each pixel to the
/// nearest set pixel of `mask` (value > 0.5). Pixels of an empty mask get
/// +infinity.
std::vector<double> squared_distance_transform(const CurbMask& mask);

struct PrfCounts {
  std::uint64_t pred_total = 0;
  std::uint64_t pred_matched = 0;
  std::uint64_t gt_total = 0;
  std::uint64_t gt_matched = 0;

  PrfCounts& operator+=(const PrfCounts& o);
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Prf prf_from_counts(const PrfCounts& c);

PrfCounts tolerance_counts(const CurbMask& pred, const CurbMask& gt, int tol_px);
Prf tolerance_prf(const CurbMask& pred, const CurbMask& gt, int tol_px);

struct RegionSize {
  int width_px = 0;
  int height_px = 0;
  bool operator==(const RegionSize&) const = default;
};

/// Window of `region` centred on the image centre.
CurbMask crop_region(const CurbMask& mask, RegionSize region);

struct EvalRow {
  RegionSize region;
  int tolerance_px = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

struct MaskPair {
  const CurbMask* pred = nullptr;
  const CurbMask* gt = nullptr;
};

/// Micro-averaged over frames: counts are summed before forming ratios.
EvalReport aggregate_report(std::span<const MaskPair> pairs, std::span<const RegionSize> regions,
                            std::span<const int> tolerances);

void write_report_csv(std::ostream& os, const EvalReport& report);
void print_report_table(std::ostream& os, const EvalReport& report);

}  // namespace curb
