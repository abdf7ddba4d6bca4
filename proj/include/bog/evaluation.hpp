#pragma once

#include <optional>
#include <span>
#include <utility>

#include "bog/skeleton.hpp"

namespace bog {

enum class Protocol {
  /// An event is correct when its trigger frame lies within
  /// `latency_frames` of the annotation's action point (same class).
  action_point,
  /// An event is correct when its frame interval overlaps the annotation by
  /// at least `min_overlap` intersection-over-union (same class).
  overlap,
};

struct EvalConfig {
  Protocol protocol = Protocol::overlap;
  FrameIndex latency_frames = 10;
  double min_overlap = 0.2;
};

struct Interval {
  FrameIndex start = 0;
  FrameIndex end = 0;  ///< inclusive
};

/// Intersection-over-union of two closed frame intervals, counting frames:
/// [1,10] vs [6,15] share 5 of 15 distinct frames -> 1/3.
double overlap_ratio(Interval a, Interval b);

struct MatchResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  /// (event index, annotation index) pairs for the true positives.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
};

/// Greedy matching in event order: each event claims the best still
/// unmatched annotation satisfying the protocol (largest overlap or smallest
/// trigger/action-point distance; ties to the earliest annotation).
/// Unmatched events count as false positives, unmatched annotations as false
/// negatives. Events should arrive in stream order (sorted by trigger).
/// Under the action_point protocol an annotation without an action point can
/// never match.
MatchResult match_detections(std::span<const DetectionEvent> events,
                             std::span<const Annotation> annotations, const EvalConfig& cfg);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Precision TP/(TP+FP), recall TP/(TP+FN), F = harmonic mean; each is 0
/// when its denominator is 0.
PRF fscore(int tp, int fp, int fn);

/// One test sequence's detector output with its ground truth.
struct SequenceEval {
  std::vector<DetectionEvent> events;
  std::vector<Annotation> annotations;
};

struct ClassReport {
  int class_id = 0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  PRF prf;
};

struct EvalReport {
  std::vector<ClassReport> per_class;  ///< sorted by class_id
  double mean_f = 0.0;
  double std_f = 0.0;  ///< sample standard deviation across classes (0 if < 2)
  std::optional<double> mean_ap;  ///< filled under the overlap protocol
};

/// Per-class counts pooled over sequences (events matched within their own
/// sequence), per-class P/R/F, their mean and spread across classes, and
/// mean average precision under the overlap protocol.
EvalReport evaluate(std::span<const SequenceEval> sequences, const EvalConfig& cfg);

/// Mean over annotated classes of average precision: events ranked by score
/// (descending) across all sequences, matched greedily within their own
/// sequence at `min_overlap` IoU, AP = sum over true positives of
/// precision-at-rank times the recall step.
double mean_average_precision(std::span<const SequenceEval> sequences, double min_overlap);

}  // namespace bog
