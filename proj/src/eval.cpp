#include "curb/eval.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "curb/errors.hpp"

namespace curb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), in place on a strided line.
void edt_1d(double* f, std::size_t n, std::size_t stride, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  d.resize(n);
  v.resize(n);
  z.resize(n + 1);
  int k = -1;
  for (std::size_t qi = 0; qi < n; ++qi) {
    const double fq = f[qi * stride];
    if (fq == kInf) continue;
    const double q = static_cast<double>(qi);
    double s = -kInf;
    while (k >= 0) {
      const double p = v[k];
      s = ((fq + q * q) - (f[v[k] * stride] + p * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = static_cast<int>(qi);
    z[k] = k == 0 ? -kInf : s;
    z[k + 1] = kInf;
  }
  if (k < 0) return;  // whole line empty
  int j = 0;
  for (std::size_t qi = 0; qi < n; ++qi) {
    const double q = static_cast<double>(qi);
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[qi] = dq * dq + f[v[j] * stride];
  }
  for (std::size_t qi = 0; qi < n; ++qi) f[qi * stride] = d[qi];
}

void require_same_grid(const CurbMask& a, const CurbMask& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("masks have different grid specs");
}

PrfCounts count_matches(const CurbMask& pred, const CurbMask& gt, const std::vector<double>& dist_to_pred,
                        const std::vector<double>& dist_to_gt, double tol2) {
  PrfCounts c;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    if (pred.values[i] > 0.5f) {
      ++c.pred_total;
      if (dist_to_gt[i] <= tol2) ++c.pred_matched;
    }
    if (gt.values[i] > 0.5f) {
      ++c.gt_total;
      if (dist_to_pred[i] <= tol2) ++c.gt_matched;
    }
  }
  return c;
}

}  // namespace

std::vector<double> squared_distance_transform(const CurbMask& mask) {
  const auto w = static_cast<std::size_t>(mask.grid.width);
  const auto h = static_cast<std::size_t>(mask.grid.height);
  std::vector<double> f(w * h);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = mask.values[i] > 0.5f ? 0.0 : kInf;
  std::vector<double> d;
  std::vector<int> v;
  std::vector<double> z;
  for (std::size_t c = 0; c < w; ++c) edt_1d(f.data() + c, h, w, d, v, z);
  for (std::size_t r = 0; r < h; ++r) edt_1d(f.data() + r * w, w, 1, d, v, z);
  return f;
}

PrfCounts& PrfCounts::operator+=(const PrfCounts& o) {
  pred_total += o.pred_total;
  pred_matched += o.pred_matched;
  gt_total += o.gt_total;
  gt_matched += o.gt_matched;
  return *this;
}

Prf prf_from_counts(const PrfCounts& c) {
  Prf r;
  if (c.pred_total == 0 && c.gt_total == 0) return {1.0, 1.0, 1.0};
  r.precision = c.pred_total == 0 ? 1.0 : static_cast<double>(c.pred_matched) / static_cast<double>(c.pred_total);
  r.recall = c.gt_total == 0 ? 1.0 : static_cast<double>(c.gt_matched) / static_cast<double>(c.gt_total);
  if (c.pred_total == 0) r.recall = 0.0;
  if (c.gt_total == 0) r.precision = 0.0;
  const double s = r.precision + r.recall;
  r.f1 = s > 0.0 ? 2.0 * r.precision * r.recall / s : 0.0;
  return r;
}

PrfCounts tolerance_counts(const CurbMask& pred, const CurbMask& gt, int tol_px) {
  require_same_grid(pred, gt);
  if (tol_px < 0) throw OutOfRange("tolerance must be >= 0");
  const double tol2 = static_cast<double>(tol_px) * tol_px;
  return count_matches(pred, gt, squared_distance_transform(pred), squared_distance_transform(gt), tol2);
}

Prf tolerance_prf(const CurbMask& pred, const CurbMask& gt, int tol_px) {
  return prf_from_counts(tolerance_counts(pred, gt, tol_px));
}

CurbMask crop_region(const CurbMask& mask, RegionSize region) {
  const GridSpec& g = mask.grid;
  if (region.width_px <= 0 || region.height_px <= 0) throw OutOfRange("region must be positive");
  if (region.width_px > g.width || region.height_px > g.height) throw RegionTooLarge("region exceeds mask size");
  const int c0 = (g.width - region.width_px) / 2;
  const int r0 = (g.height - region.height_px) / 2;
  GridSpec sub = g;
  sub.width = region.width_px;
  sub.height = region.height_px;
  CurbMask out(sub);
  for (int r = 0; r < sub.height; ++r) {
    const float* src = mask.values.data() + static_cast<std::size_t>(r0 + r) * g.width + c0;
    std::copy(src, src + sub.width, out.values.begin() + static_cast<std::ptrdiff_t>(r) * sub.width);
  }
  return out;
}

EvalReport aggregate_report(std::span<const MaskPair> pairs, std::span<const RegionSize> regions,
                            std::span<const int> tolerances) {
  if (pairs.empty()) throw OutOfRange("aggregate_report needs at least one mask pair");
  EvalReport report;
  for (const RegionSize& region : regions) {
    std::vector<PrfCounts> totals(tolerances.size());
    for (const MaskPair& p : pairs) {
      require_same_grid(*p.pred, *p.gt);
      const CurbMask pred = crop_region(*p.pred, region);
      const CurbMask gt = crop_region(*p.gt, region);
      const std::vector<double> dist_to_gt = squared_distance_transform(gt);
      const std::vector<double> dist_to_pred = squared_distance_transform(pred);
      for (std::size_t t = 0; t < tolerances.size(); ++t) {
        if (tolerances[t] < 0) throw OutOfRange("tolerance must be >= 0");
        const double tol2 = static_cast<double>(tolerances[t]) * tolerances[t];
        totals[t] += count_matches(pred, gt, dist_to_pred, dist_to_gt, tol2);
      }
    }
    for (std::size_t t = 0; t < tolerances.size(); ++t) {
      const Prf prf = prf_from_counts(totals[t]);
      report.rows.push_back({region, tolerances[t], prf.precision, prf.recall, prf.f1});
    }
  }
  return report;
}

void write_report_csv(std::ostream& os, const EvalReport& report) {
  os << "region_w,region_h,tol_px,precision,recall,f1\n";
  char buf[128];
  for (const EvalRow& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.6f,%.6f,%.6f\n", r.region.width_px, r.region.height_px,
                  r.tolerance_px, r.precision, r.recall, r.f1);
    os << buf;
  }
}

void print_report_table(std::ostream& os, const EvalReport& report) {
  os << "micro-averaged over frames\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-11s %6s %10s %10s %10s\n", "region", "tol_px", "precision", "recall", "f1");
  os << buf;
  for (const EvalRow& r : report.rows) {
    char region[32];
    std::snprintf(region, sizeof region, "%dx%d", r.region.width_px, r.region.height_px);
    std::snprintf(buf, sizeof buf, "%-11s %6d %10.4f %10.4f %10.4f\n", region, r.tolerance_px, r.precision,
                  r.recall, r.f1);
    os << buf;
  }
}

}  // namespace curb
