#include "bog/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace bog {

namespace {

// Indices follow default_topology().
enum JointId : int {
  kHipCenter = 0, kSpine, kShoulderCenter, kHead,
  kShoulderLeft, kElbowLeft, kWristLeft, kHandLeft,
  kShoulderRight, kElbowRight, kWristRight, kHandRight,
  kHipLeft, kKneeLeft, kAnkleLeft, kFootLeft,
  kHipRight, kKneeRight, kAnkleRight, kFootRight,
};

constexpr double kNeutral[20][3] = {
    {0.00, 0.90, 2.50},   // hip_center
    {0.00, 1.15, 2.50},   // spine
    {0.00, 1.40, 2.50},   // shoulder_center
    {0.00, 1.62, 2.50},   // head
    {-0.18, 1.38, 2.50},  // shoulder_left
    {-0.24, 1.12, 2.50},  // elbow_left
    {-0.26, 0.90, 2.50},  // wrist_left
    {-0.27, 0.82, 2.50},  // hand_left
    {0.18, 1.38, 2.50},   // shoulder_right
    {0.24, 1.12, 2.50},   // elbow_right
    {0.26, 0.90, 2.50},   // wrist_right
    {0.27, 0.82, 2.50},   // hand_right
    {-0.09, 0.85, 2.50},  // hip_left
    {-0.10, 0.48, 2.50},  // knee_left
    {-0.10, 0.08, 2.50},  // ankle_left
    {-0.10, 0.02, 2.62},  // foot_left
    {0.09, 0.85, 2.50},   // hip_right
    {0.10, 0.48, 2.50},   // knee_right
    {0.10, 0.08, 2.50},   // ankle_right
    {0.10, 0.02, 2.62},   // foot_right
};

// Ramp in over the first 15% of the instance, hold, ramp out over the last
// 15%, so most annotated frames carry full-strength motion while the
// boundaries still blend into the surrounding pauses.
double trapezoid_envelope(double progress) {
  constexpr double ramp = 0.15;
  if (progress < ramp) return progress / ramp;
  if (progress > 1.0 - ramp) return (1.0 - progress) / ramp;
  return 1.0;
}

}  // namespace

SkeletonFrame neutral_pose_frame(FrameIndex index) {
  SkeletonFrame f;
  f.index = index;
  f.joints.resize(20);
  for (int j = 0; j < 20; ++j) {
    f.joints[j] = {kNeutral[j][0], kNeutral[j][1], kNeutral[j][2]};
  }
  return f;
}

MotionSignature default_signature(int class_id) {
  if (class_id < 0) throw std::invalid_argument("default_signature: negative class id");
  static const std::vector<MotionSignature> bank = {
      // right arm wave
      {{{kElbowRight, 0.06, 0.18, 0.02, 1.10, 0.0},
        {kWristRight, 0.10, 0.30, 0.03, 1.10, 0.4},
        {kHandRight, 0.12, 0.34, 0.04, 1.10, 0.6}}},
      // left leg kick
      {{{kKneeLeft, 0.02, 0.10, 0.16, 0.80, 0.0},
        {kAnkleLeft, 0.03, 0.14, 0.30, 0.80, 0.3},
        {kFootLeft, 0.03, 0.15, 0.34, 0.80, 0.4}}},
      // both hands raise
      {{{kElbowLeft, 0.02, 0.20, 0.02, 0.55, 0.0},
        {kWristLeft, 0.03, 0.36, 0.03, 0.55, 0.0},
        {kHandLeft, 0.03, 0.42, 0.03, 0.55, 0.0},
        {kElbowRight, -0.02, 0.20, 0.02, 0.55, 0.0},
        {kWristRight, -0.03, 0.36, 0.03, 0.55, 0.0},
        {kHandRight, -0.03, 0.42, 0.03, 0.55, 0.0}}},
      // head and shoulder sway
      {{{kHead, 0.16, 0.02, 0.02, 1.40, 0.0},
        {kShoulderCenter, 0.08, 0.01, 0.01, 1.40, 0.2}}},
      // squat
      {{{kHipCenter, 0.0, -0.16, 0.02, 0.70, 0.0},
        {kHipLeft, 0.0, -0.16, 0.02, 0.70, 0.0},
        {kHipRight, 0.0, -0.16, 0.02, 0.70, 0.0},
        {kSpine, 0.0, -0.14, 0.02, 0.70, 0.0},
        {kShoulderCenter, 0.0, -0.12, 0.02, 0.70, 0.0},
        {kHead, 0.0, -0.12, 0.02, 0.70, 0.0},
        {kKneeLeft, 0.0, -0.04, 0.10, 0.70, 0.0},
        {kKneeRight, 0.0, -0.04, 0.10, 0.70, 0.0}}},
      // torso lean
      {{{kSpine, 0.10, -0.01, 0.02, 0.90, 0.0},
        {kShoulderCenter, 0.18, -0.02, 0.03, 0.90, 0.0},
        {kHead, 0.24, -0.03, 0.04, 0.90, 0.0}}},
  };
  const int base = class_id % static_cast<int>(bank.size());
  const int round = class_id / static_cast<int>(bank.size());
  MotionSignature sig = bank[base];
  if (round > 0) {
    for (JointSinusoid& part : sig.parts) {
      part.freq_hz *= 1.0 + 0.35 * round;
      part.phase += 0.9 * round;
    }
  }
  return sig;
}

std::vector<int> alternating_schedule(int class_count, int instances_per_class) {
  std::vector<int> schedule;
  schedule.push_back(kPauseToken);
  for (int i = 0; i < instances_per_class; ++i) {
    for (int c = 0; c < class_count; ++c) {
      schedule.push_back(c);
      schedule.push_back(kPauseToken);
    }
  }
  return schedule;
}

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  if (spec.class_count < 1) throw std::invalid_argument("generate_synthetic: class_count < 1");
  if (spec.instance_len_min < 2 || spec.instance_len_max < spec.instance_len_min) {
    throw std::invalid_argument("generate_synthetic: bad instance length range");
  }
  if (spec.pause_len_min < 1 || spec.pause_len_max < spec.pause_len_min) {
    throw std::invalid_argument("generate_synthetic: bad pause length range");
  }
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("generate_synthetic: negative noise");
  if (!(spec.fps > 0.0)) throw std::invalid_argument("generate_synthetic: fps must be positive");

  std::vector<MotionSignature> signatures = spec.signatures;
  if (signatures.empty()) {
    for (int c = 0; c < spec.class_count; ++c) signatures.push_back(default_signature(c));
  }
  if (static_cast<int>(signatures.size()) < spec.class_count) {
    throw std::invalid_argument("generate_synthetic: fewer signatures than classes");
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> instance_len(spec.instance_len_min, spec.instance_len_max);
  std::uniform_int_distribution<int> pause_len(spec.pause_len_min, spec.pause_len_max);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  SyntheticResult out;
  out.sequence.fps = spec.fps;
  auto& frames = out.sequence.frames;

  auto push_frame = [&](SkeletonFrame f) {
    if (spec.noise_sigma > 0.0) {
      for (Joint& j : f.joints) {
        j.x += noise(rng);
        j.y += noise(rng);
        j.z += noise(rng);
      }
    }
    frames.push_back(std::move(f));
  };

  const std::vector<int> fallback_schedule{kPauseToken};
  const std::vector<int>& schedule = spec.schedule.empty() ? fallback_schedule : spec.schedule;
  for (int token : schedule) {
    if (token == kPauseToken) {
      const int len = pause_len(rng);
      for (int i = 0; i < len; ++i) {
        push_frame(neutral_pose_frame(static_cast<FrameIndex>(frames.size())));
      }
      continue;
    }
    if (token < 0 || token >= spec.class_count) {
      throw std::invalid_argument("generate_synthetic: schedule token out of range");
    }
    const int len = instance_len(rng);
    const FrameIndex start = static_cast<FrameIndex>(frames.size());
    const MotionSignature& sig = signatures[token];
    for (int i = 0; i < len; ++i) {
      SkeletonFrame f = neutral_pose_frame(static_cast<FrameIndex>(frames.size()));
      const double env = trapezoid_envelope(static_cast<double>(i) / (len - 1));
      const double t_sec = static_cast<double>(i) / spec.fps;
      for (const JointSinusoid& part : sig.parts) {
        const double phase = 2.0 * std::numbers::pi * part.freq_hz * t_sec + part.phase;
        const double s = env * std::sin(phase);
        Joint& j = f.joints[part.joint];
        j.x += part.amp_x * s;
        j.y += part.amp_y * s;
        j.z += part.amp_z * s;
      }
      push_frame(std::move(f));
    }
    const FrameIndex end = static_cast<FrameIndex>(frames.size()) - 1;
    out.annotations.push_back({token, start, end, start + (end - start) / 2});
  }
  return out;
}

}  // namespace bog
