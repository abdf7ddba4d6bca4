#include "bog/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bog {

namespace {

constexpr double kMask = -std::numeric_limits<double>::infinity();

// Kadane scan skipping -inf entries; intervals never cross them. Returns
// nullopt when every entry is masked. Ties keep the earliest start, then the
// shortest interval: the running start never moves backwards, so a later
// candidate can never beat an equal-sum earlier one, and extending on a zero
// running sum (rather than restarting) keeps the earliest start for equal
// sums.
std::optional<SubarrayResult> kadane_scan(std::span<const double> a) {
  std::optional<SubarrayResult> best;
  bool run_active = false;
  double run_sum = 0.0;
  std::size_t run_start = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == kMask) {
      run_active = false;
      continue;
    }
    if (!run_active || run_sum < 0.0) {
      run_active = true;
      run_sum = a[i];
      run_start = i;
    } else {
      run_sum += a[i];
    }
    if (!best || run_sum > best->sum) {
      best = SubarrayResult{run_start, i, run_sum};
    }
  }
  return best;
}

}  // namespace

SubarrayResult kadane_max_subarray(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("kadane_max_subarray: empty input");
  const auto r = kadane_scan(scores);
  if (!r) throw std::invalid_argument("kadane_max_subarray: no unmasked entries");
  return *r;
}

ScoreArray frame_scores(const std::vector<SoftAssignment>& frames, const ClassModel& model) {
  ScoreArray out;
  out.class_id = model.class_id;
  out.scores.resize(frames.size());
  const int k = model.k();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    double s = 0.0;
    for (const Vote& v : frames[t]) {
      if (v.cluster < 0 || v.cluster >= k) {
        throw std::invalid_argument("frame_scores: vote cluster out of model range");
      }
      s += v.weight * model.weights[v.cluster];
    }
    out.scores[t] = s;
  }
  return out;
}

ScoreArray frame_scores(const SkeletonSequence& seq, const SkeletonTopology& topo,
                        const Codebook& codebook, const ClassModel& model, int m,
                        const DescriptorParams& params) {
  return frame_scores(encode_sequence(seq, topo, params, codebook, m), model);
}

Vector smooth(const Vector& scores, const SmoothingParams& params) {
  if (params.window < 1 || params.window % 2 == 0) {
    throw std::invalid_argument("smooth: window must be odd and >= 1");
  }
  if (params.window == 1 || scores.empty()) return scores;

  const int half = (params.window - 1) / 2;
  const double anchor = params.anchor_weighted ? static_cast<double>(params.window - 1) : 1.0;
  const double denom = params.anchor_weighted ? 2.0 * (params.window - 1)
                                              : static_cast<double>(params.window);
  const auto n = static_cast<FrameIndex>(scores.size());
  Vector out(scores.size());
  for (FrameIndex t = 0; t < n; ++t) {
    double acc = anchor * scores[t];
    for (int d = 1; d <= half; ++d) {
      acc += scores[std::clamp<FrameIndex>(t - d, 0, n - 1)];
      acc += scores[std::clamp<FrameIndex>(t + d, 0, n - 1)];
    }
    out[t] = acc / denom;
  }
  return out;
}

ScoreArray smooth(const ScoreArray& scores, const SmoothingParams& params) {
  return {scores.class_id, smooth(scores.scores, params)};
}

std::vector<DetectionEvent> detect_offline(const ScoreArray& scores, double threshold) {
  std::vector<DetectionEvent> events;
  if (scores.scores.empty()) return events;
  Vector masked = scores.scores;
  while (auto r = kadane_scan(masked)) {
    if (r->sum < threshold) break;
    events.push_back({scores.class_id, static_cast<FrameIndex>(r->start),
                      static_cast<FrameIndex>(r->end), static_cast<FrameIndex>(r->end), r->sum});
    std::fill(masked.begin() + r->start, masked.begin() + r->end + 1, kMask);
  }
  std::sort(events.begin(), events.end(),
            [](const DetectionEvent& a, const DetectionEvent& b) {
              return a.start_frame < b.start_frame;
            });
  return events;
}

OnlineDetector::OnlineDetector(OnlineDetectorParams params) : params_(std::move(params)) {
  if (params_.channels.empty()) throw std::invalid_argument("OnlineDetector: no channels");
  if (params_.patience < 1) throw std::invalid_argument("OnlineDetector: patience must be >= 1");
  states_.resize(params_.channels.size());
}

void OnlineDetector::reset() {
  std::fill(states_.begin(), states_.end(), ChannelState{});
}

std::optional<DetectionEvent> OnlineDetector::push(std::span<const double> class_scores) {
  if (class_scores.size() != states_.size()) {
    throw std::invalid_argument("OnlineDetector::push: score count does not match channels");
  }
  const FrameIndex t = next_frame_++;
  int fire_channel = -1;
  for (std::size_t c = 0; c < states_.size(); ++c) {
    ChannelState& st = states_[c];
    const double s = class_scores[c];
    if (st.armed) {
      // The interval is committed once armed: keep accumulating, no restarts
      // until the event terminates.
      st.run_sum += s;
      if (st.run_sum >= st.peak_sum) {
        st.peak_sum = st.run_sum;
        st.peak_frame = t;
      }
    } else {
      if (!st.run_active || st.run_sum < 0.0) {
        st.run_active = true;
        st.run_sum = s;
        st.run_start = t;
      } else {
        st.run_sum += s;
      }
      if (st.run_sum >= params_.channels[c].threshold) {
        st.armed = true;
        st.peak_sum = st.run_sum;
        st.peak_frame = t;
        st.negative_run = 0;
      }
    }
    if (st.armed) {
      if (s < 0.0) {
        if (++st.negative_run >= params_.patience) {
          if (fire_channel < 0 || st.peak_sum > states_[fire_channel].peak_sum) {
            fire_channel = static_cast<int>(c);
          }
        }
      } else {
        st.negative_run = 0;
      }
    }
  }
  if (fire_channel < 0) return std::nullopt;
  const ChannelState& st = states_[fire_channel];
  DetectionEvent ev{params_.channels[fire_channel].class_id, st.run_start, st.peak_frame, t,
                    st.peak_sum};
  // One event terminates the search everywhere; scanning resumes at t+1.
  reset();
  return ev;
}

StreamingDetector::StreamingDetector(SkeletonTopology topo, DescriptorParams params,
                                     Codebook codebook, std::vector<ClassModel> models, int m,
                                     SmoothingParams smoothing, int patience)
    : topo_(std::move(topo)),
      params_(params),
      codebook_(std::move(codebook)),
      models_(std::move(models)),
      m_(m),
      smoothing_(smoothing),
      online_([&] {
        OnlineDetectorParams p;
        for (const ClassModel& mdl : models_) p.channels.push_back({mdl.class_id, mdl.threshold});
        p.patience = patience;
        return p;
      }()) {
  if (models_.empty()) throw std::invalid_argument("StreamingDetector: no models");
  if (smoothing_.window < 1 || smoothing_.window % 2 == 0) {
    throw std::invalid_argument("StreamingDetector: window must be odd and >= 1");
  }
  if (!params_.valid()) throw std::invalid_argument("StreamingDetector: invalid descriptor params");
  if (codebook_.dim != descriptor_length(topo_)) {
    throw std::invalid_argument("StreamingDetector: codebook dimension does not match topology");
  }
  for (const ClassModel& mdl : models_) {
    if (mdl.k() != codebook_.size()) {
      throw std::invalid_argument("StreamingDetector: model size does not match codebook");
    }
  }
  const auto [d1, d2] = derivative_offsets(params_);
  d1_ = d1;
  d2_ = d2;
  half_ = (smoothing_.window - 1) / 2;
}

const Vector& StreamingDetector::pose_at(FrameIndex t) const {
  const FrameIndex hi = pose_base_ + static_cast<FrameIndex>(poses_.size()) - 1;
  return poses_[std::clamp<FrameIndex>(t, pose_base_, hi) - pose_base_];
}

const Vector& StreamingDetector::angles_at(FrameIndex t) const {
  const FrameIndex hi = pose_base_ + static_cast<FrameIndex>(angles_.size()) - 1;
  return angles_[std::clamp<FrameIndex>(t, pose_base_, hi) - pose_base_];
}

double StreamingDetector::raw_score_at(FrameIndex t, std::size_t channel) const {
  const FrameIndex hi = raw_base_ + static_cast<FrameIndex>(raw_scores_.size()) - 1;
  return raw_scores_[std::clamp<FrameIndex>(t, raw_base_, hi) - raw_base_][channel];
}

void StreamingDetector::emit_ready(bool flush, std::vector<DetectionEvent>& out) {
  // Descriptors: frame t needs poses up to t + d2 (or the end of the stream
  // when flushing; clamping then repeats the last frame, as in the batch
  // path).
  while (next_descriptor_ < frames_in_ &&
         (flush || next_descriptor_ + d2_ <= frames_in_ - 1)) {
    const FrameIndex t = next_descriptor_;
    const Vector desc = assemble_descriptor(
        pose_at(t), pose_at(t - d1_), pose_at(t + d1_), pose_at(t - d2_), pose_at(t + d2_),
        angles_at(t), angles_at(t - d1_), angles_at(t + d1_), params_);
    const SoftAssignment votes = soft_assign(desc, codebook_, m_);
    Vector raw(models_.size(), 0.0);
    for (std::size_t c = 0; c < models_.size(); ++c) {
      double s = 0.0;
      for (const Vote& v : votes) s += v.weight * models_[c].weights[v.cluster];
      raw[c] = s;
    }
    raw_scores_.push_back(std::move(raw));
    ++next_descriptor_;
    // Frames older than next_descriptor_ - d2 can no longer enter a stencil.
    while (pose_base_ < next_descriptor_ - d2_) {
      poses_.pop_front();
      angles_.pop_front();
      ++pose_base_;
    }
  }

  // Smoothing: frame u needs raw scores up to u + half (or stream end).
  const FrameIndex raw_hi = raw_base_ + static_cast<FrameIndex>(raw_scores_.size()) - 1;
  const double anchor =
      smoothing_.anchor_weighted ? static_cast<double>(smoothing_.window - 1) : 1.0;
  const double denom = smoothing_.anchor_weighted ? 2.0 * (smoothing_.window - 1)
                                                  : static_cast<double>(smoothing_.window);
  while (next_smoothed_ < next_descriptor_ &&
         (flush ? next_smoothed_ <= raw_hi : next_smoothed_ + half_ <= raw_hi)) {
    const FrameIndex u = next_smoothed_;
    Vector smoothed(models_.size());
    for (std::size_t c = 0; c < models_.size(); ++c) {
      if (smoothing_.window == 1) {
        smoothed[c] = raw_score_at(u, c);
      } else {
        double acc = anchor * raw_score_at(u, c);
        for (int d = 1; d <= half_; ++d) {
          acc += raw_score_at(u - d, c);
          acc += raw_score_at(u + d, c);
        }
        smoothed[c] = acc / denom;
      }
    }
    if (auto ev = online_.push(smoothed)) out.push_back(*ev);
    ++next_smoothed_;
    while (raw_base_ < next_smoothed_ - half_) {
      raw_scores_.pop_front();
      ++raw_base_;
    }
  }
}

std::vector<DetectionEvent> StreamingDetector::push(const SkeletonFrame& frame) {
  poses_.push_back(normalize_pose(frame, topo_));
  angles_.push_back(compute_angles(frame, topo_));
  ++frames_in_;
  std::vector<DetectionEvent> out;
  emit_ready(false, out);
  return out;
}

std::vector<DetectionEvent> StreamingDetector::finish() {
  std::vector<DetectionEvent> out;
  emit_ready(true, out);
  return out;
}

}  // namespace bog
