#include "curb/postprocess.hpp"

#include <vector>

#include "curb/errors.hpp"

namespace curb {

void PostprocessConfig::validate() const {
  if (!(prob_threshold > 0.0f && prob_threshold < 1.0f)) throw ConfigError("prob_threshold must lie in (0, 1)");
  if (dilation_radius_px < 0) throw ConfigError("dilation_radius_px must be >= 0");
}

FilterResult filter_frames(std::span<const FrameRecord> history, const Trajectory& traj,
                           const PostprocessConfig& cfg) {
  if (history.empty()) throw OutOfRange("filter_frames needs at least one frame");
  const FrameRecord& newest = history.back();
  if (history.size() < PostprocessConfig::kWindow) {
    return {threshold(newest.prob_mask, cfg.prob_threshold, true), true};
  }
  const auto window = history.last(PostprocessConfig::kWindow);
  std::vector<std::uint8_t> count(newest.prob_mask.values.size(), 0);
  for (const auto& frame : window) {
    if (!(frame.prob_mask.grid == newest.prob_mask.grid)) throw GridMismatch("frame grids differ within a session");
    CurbMask support = dilate(threshold(frame.prob_mask, cfg.prob_threshold, true), cfg.dilation_radius_px);
    if (frame.timestamp != newest.timestamp) {
      support = warp_mask(support, traj.relative_transform(newest.timestamp, frame.timestamp));
    }
    for (std::size_t i = 0; i < count.size(); ++i) count[i] += support.values[i] > 0.5f ? 1 : 0;
  }
  CurbMask out(newest.prob_mask.grid);
  for (std::size_t i = 0; i < count.size(); ++i) out.values[i] = count[i] == PostprocessConfig::kWindow ? 1.0f : 0.0f;
  return {std::move(out), false};
}

CurbMask track_frames(std::span<const FilteredFrame> filtered, const Trajectory& traj) {
  if (filtered.empty()) throw OutOfRange("track_frames needs at least one frame");
  const auto window = filtered.size() > PostprocessConfig::kWindow ? filtered.last(PostprocessConfig::kWindow) : filtered;
  const FilteredFrame& newest = window.back();
  CurbMask out = threshold(newest.mask, 0.5f);
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    const CurbMask warped = warp_mask(window[i].mask, traj.relative_transform(newest.timestamp, window[i].timestamp));
    out = mask_union(out, warped);
  }
  return out;
}

PostprocessSession::PostprocessSession(const Trajectory& traj, PostprocessConfig cfg) : traj_(&traj), cfg_(cfg) {
  cfg_.validate();
}

PostprocessSession::Output PostprocessSession::push(Micros timestamp, CurbMask prob_mask) {
  if (!raw_.empty() && timestamp <= raw_.back().timestamp) throw OutOfRange("frames must arrive in time order");
  raw_.push_back({timestamp, std::move(prob_mask)});
  while (raw_.size() > PostprocessConfig::kWindow) raw_.pop_front();
  const std::vector<FrameRecord> history(raw_.begin(), raw_.end());
  FilterResult f = filter_frames(history, *traj_, cfg_);

  filtered_.push_back({timestamp, f.mask});
  while (filtered_.size() > PostprocessConfig::kWindow) filtered_.pop_front();
  const std::vector<FilteredFrame> window(filtered_.begin(), filtered_.end());
  return {std::move(f.mask), track_frames(window, *traj_), f.warm_up};
}

}  // namespace curb
