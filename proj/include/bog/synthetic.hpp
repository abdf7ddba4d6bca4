#pragma once

#include <cstdint>

#include "bog/skeleton.hpp"

namespace bog {

/// One oscillating joint inside a motion signature: a sinusoid with
/// per-axis amplitudes, a frequency in Hz, and a phase offset. Instance
/// displacement at local time t is amp * envelope(t) * sin(2*pi*f*t + phase).
struct JointSinusoid {
  int joint = 0;
  double amp_x = 0.0;
  double amp_y = 0.0;
  double amp_z = 0.0;
  double freq_hz = 1.0;
  double phase = 0.0;
};

/// The set of joints a class moves. Classes in the default bank move
/// disjoint joint groups at distinct frequencies so they stay separable.
struct MotionSignature {
  std::vector<JointSinusoid> parts;
};

inline constexpr int kPauseToken = -1;

/// Generator spec. The schedule is walked left to right: kPauseToken emits a
/// neutral-pose pause with a length drawn from [pause_len_min,
/// pause_len_max]; any other token emits one instance of that class with a
/// length from [instance_len_min, instance_len_max] and an annotation whose
/// action point is the middle frame. Gaussian noise with sigma noise_sigma
/// is added to every coordinate of every frame. Identical specs generate
/// identical output.
struct SyntheticSpec {
  int class_count = 3;
  std::vector<MotionSignature> signatures;  ///< per class; default bank when empty
  int instance_len_min = 40;
  int instance_len_max = 60;
  int pause_len_min = 20;
  int pause_len_max = 40;
  double noise_sigma = 0.001;
  std::uint64_t seed = 1;
  std::vector<int> schedule;
  double fps = 30.0;
};

struct SyntheticResult {
  SkeletonSequence sequence;
  std::vector<Annotation> annotations;  ///< sorted by start frame
};

/// The standing rest pose every pause holds and instances deviate from.
SkeletonFrame neutral_pose_frame(FrameIndex index);

/// Built-in signature bank (arm wave, leg kick, two-hand raise, head sway,
/// squat, torso lean); class ids beyond the bank reuse it with shifted
/// frequency and phase so any class count stays pairwise distinct.
MotionSignature default_signature(int class_id);

/// pause, class, pause, class, ... round-robin over `class_count` classes
/// with `instances_per_class` instances each, ending on a pause.
std::vector<int> alternating_schedule(int class_count, int instances_per_class);

SyntheticResult generate_synthetic(const SyntheticSpec& spec);

}  // namespace bog
