#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bog {

using FrameIndex = std::int64_t;

struct Joint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct SkeletonFrame {
  FrameIndex index = 0;
  std::vector<Joint> joints;
};

/// A stream of skeleton frames. Valid sequences have frame indices running
/// 0, 1, 2, ... with a fixed joint count per frame and finite coordinates;
/// use validate_sequence to check.
struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  double fps = 30.0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

/// Angle measured at `vertex` between the rays vertex->a and vertex->b.
struct AngleTriplet {
  int a = 0;
  int vertex = 0;
  int b = 0;
};

struct SkeletonTopology {
  std::vector<std::string> joint_names;
  int reference_joint = 0;  ///< the joint every pose is centered on
  std::vector<AngleTriplet> angle_triplets;

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  int angle_count() const { return static_cast<int>(angle_triplets.size()); }
  int joint_index(const std::string& name) const;  // -1 if unknown
};

/// The stock 20-joint skeleton (Kinect v1 naming), reference joint
/// hip_center, and a documented set of 35 angle triplets covering limb
/// flexion plus inter-limb spans. Alternative topologies can be loaded from
/// a topology file.
SkeletonTopology default_topology();

/// Closed frame interval [start_frame, end_frame] labeled with a class.
/// action_point, when present, is the class-specific anchor frame used by
/// latency-based evaluation and lies inside the interval.
struct Annotation {
  int class_id = 0;
  FrameIndex start_frame = 0;
  FrameIndex end_frame = 0;
  std::optional<FrameIndex> action_point;
};

bool annotation_valid(const Annotation& a);

/// A fired detection. start_frame <= end_frame <= trigger_frame: the event
/// covers [start_frame, end_frame] and was emitted while reading
/// trigger_frame.
struct DetectionEvent {
  int class_id = 0;
  FrameIndex start_frame = 0;
  FrameIndex end_frame = 0;
  FrameIndex trigger_frame = 0;
  double score = 0.0;
};

struct Violation {
  FrameIndex frame = 0;  ///< frame position the problem was found at, -1 if global
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Diagnoses a sequence against a topology: contiguous 0-based frame
/// indices, per-frame joint count, finite coordinates, positive fps.
/// Returns all violations found rather than throwing.
ValidationResult validate_sequence(const SkeletonSequence& seq, const SkeletonTopology& topo);

/// Diagnoses a topology: non-empty joints, reference in range, triplet
/// endpoints in range and distinct from the vertex.
ValidationResult validate_topology(const SkeletonTopology& topo);

}  // namespace bog
