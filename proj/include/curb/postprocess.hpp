#pragma once

#include <deque>
#include <span>

#include "curb/bev.hpp"
#include "curb/geometry.hpp"

namespace curb {

struct PostprocessConfig {
  static constexpr std::size_t kWindow = 3;
  float prob_threshold = 0.7f;
  int dilation_radius_px = 1;

  void validate() const;
};

struct FrameRecord {
  Micros timestamp = 0;
  CurbMask prob_mask;
};

struct FilterResult {
  CurbMask mask;
  bool warm_up = false;  // fewer than three frames were available
};

/// Three-frame consensus. `history` is ordered oldest to newest; only the
/// last three entries are used. Each frame's super-threshold support is
/// dilated, the older two are warped into the newest frame, and pixels present
/// in all three survive. With fewer than three frames the newest mask is
/// thresholded and passed through.
FilterResult filter_frames(std::span<const FrameRecord> history, const Trajectory& traj,
                           const PostprocessConfig& cfg = {});

struct FilteredFrame {
  Micros timestamp = 0;
  CurbMask mask;
};

/// Union of the last three filtered masks after warping into the newest frame.
CurbMask track_frames(std::span<const FilteredFrame> filtered, const Trajectory& traj);

/// Sliding-window session: push raw probability masks in time order and get
/// the filtered and tracked outputs for the newest frame.
class PostprocessSession {
 public:
  struct Output {
    CurbMask filtered;
    CurbMask tracked;
    bool warm_up = false;
  };

  PostprocessSession(const Trajectory& traj, PostprocessConfig cfg = {});

  Output push(Micros timestamp, CurbMask prob_mask);

 private:
  const Trajectory* traj_;
  PostprocessConfig cfg_;
  std::deque<FrameRecord> raw_;
  std::deque<FilteredFrame> filtered_;
};

}  // namespace curb
