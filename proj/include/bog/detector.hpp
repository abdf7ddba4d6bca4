#pragma once

#include <deque>
#include <optional>

#include "bog/classifier.hpp"
#include "bog/codebook.hpp"
#include "bog/skeleton.hpp"

namespace bog {

/// Per-frame detection scores for one class over a sequence.
struct ScoreArray {
  int class_id = -1;
  Vector scores;
};

/// Because the classifier is linear, a span score decomposes into per-frame
/// contributions: score[t] is the sum over frame t's votes of
/// vote_weight * model_weight[cluster]. The bias is deliberately left out so
/// scores of concatenated spans add up.
ScoreArray frame_scores(const std::vector<SoftAssignment>& frames, const ClassModel& model);

/// Convenience overload running descriptor extraction and soft assignment
/// first.
ScoreArray frame_scores(const SkeletonSequence& seq, const SkeletonTopology& topo,
                        const Codebook& codebook, const ClassModel& model, int m,
                        const DescriptorParams& params);

struct SmoothingParams {
  int window = 3;  ///< odd, >= 1; 1 disables smoothing
  /// Weight the anchor frame by its neighbor count (window - 1) instead of
  /// averaging uniformly over the window.
  bool anchor_weighted = true;
};

/// Moving average with edge clamping. In the anchor-weighted form the output
/// at t is ((window-1)*in[t] + sum of neighbors) / (2*(window-1)) over the
/// (window-1)/2 neighbors on each side.
ScoreArray smooth(const ScoreArray& scores, const SmoothingParams& params);
Vector smooth(const Vector& scores, const SmoothingParams& params);

struct SubarrayResult {
  std::size_t start = 0;
  std::size_t end = 0;  ///< inclusive
  double sum = 0.0;
};

/// Maximum-sum contiguous subarray in one pass and O(1) extra space. The
/// interval is never empty (an all-negative input yields its largest single
/// element). Ties prefer the earliest start, then the shortest interval.
SubarrayResult kadane_max_subarray(std::span<const double> scores);

/// Offline detection: repeatedly take the maximum-sum subarray, emit it as
/// an event while its sum clears `threshold`, then mask it with -inf; the
/// scan treats -inf entries as barriers no interval may cross. Events come
/// back sorted by start frame, with trigger_frame = end_frame.
std::vector<DetectionEvent> detect_offline(const ScoreArray& scores, double threshold);

struct ClassChannel {
  int class_id = 0;
  double threshold = 0.0;
};

struct OnlineDetectorParams {
  std::vector<ClassChannel> channels;
  /// Consecutive negative-score frames needed to terminate an armed event.
  int patience = 1;
};

/// Streaming detector over per-class smoothed score streams. Each class
/// channel runs the maximum-subarray recurrence (sum, start) in O(1) per
/// frame; a channel arms once its running sum reaches the class threshold,
/// then tracks the peak sum and the last frame attaining it. After
/// `patience` consecutive negative scores an armed channel fires an event
/// covering [run start, peak frame], and every channel resets so the search
/// resumes fresh on the next frame. When several channels fire on the same
/// frame the highest peak sum wins, ties to the lower class_id.
class OnlineDetector {
 public:
  explicit OnlineDetector(OnlineDetectorParams params);

  /// Feed one frame's smoothed scores (one per channel, channel order).
  std::optional<DetectionEvent> push(std::span<const double> class_scores);

  void reset();
  FrameIndex frames_pushed() const { return next_frame_; }
  int channel_count() const { return static_cast<int>(params_.channels.size()); }

 private:
  struct ChannelState {
    bool run_active = false;
    double run_sum = 0.0;
    FrameIndex run_start = 0;
    bool armed = false;
    double peak_sum = 0.0;
    FrameIndex peak_frame = 0;
    int negative_run = 0;
  };

  OnlineDetectorParams params_;
  std::vector<ChannelState> states_;
  FrameIndex next_frame_ = 0;
};

/// Frame-in, events-out online pipeline: descriptor extraction, soft
/// assignment, per-class scoring, smoothing, and the OnlineDetector, all
/// incremental. Descriptor and smoothing stencils need future frames, so
/// emission lags input by (second-difference offset + smoothing half-window)
/// frames; finish() flushes the tail with the same edge clamping the batch
/// path uses, making the full run equivalent to batch scoring + smoothing +
/// OnlineDetector. Per-frame work and buffered state are independent of
/// stream length.
class StreamingDetector {
 public:
  StreamingDetector(SkeletonTopology topo, DescriptorParams params, Codebook codebook,
                    std::vector<ClassModel> models, int m, SmoothingParams smoothing,
                    int patience = 1);

  std::vector<DetectionEvent> push(const SkeletonFrame& frame);
  std::vector<DetectionEvent> finish();
  FrameIndex frames_pushed() const { return frames_in_; }

 private:
  void emit_ready(bool flush, std::vector<DetectionEvent>& out);
  const Vector& pose_at(FrameIndex t) const;
  const Vector& angles_at(FrameIndex t) const;
  double raw_score_at(FrameIndex t, std::size_t channel) const;

  SkeletonTopology topo_;
  DescriptorParams params_;
  Codebook codebook_;
  std::vector<ClassModel> models_;
  int m_;
  SmoothingParams smoothing_;
  int d1_ = 1, d2_ = 2, half_ = 1;

  std::deque<Vector> poses_, angles_;
  FrameIndex pose_base_ = 0;  ///< frame index of poses_.front()
  std::deque<Vector> raw_scores_;  ///< per frame: one raw score per channel
  FrameIndex raw_base_ = 0;
  FrameIndex frames_in_ = 0;
  FrameIndex next_descriptor_ = 0;
  FrameIndex next_smoothed_ = 0;
  OnlineDetector online_;
};

}  // namespace bog
