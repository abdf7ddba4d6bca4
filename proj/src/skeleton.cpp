#include "bog/skeleton.hpp"

#include <cmath>

namespace bog {

int SkeletonTopology::joint_index(const std::string& name) const {
  for (std::size_t i = 0; i < joint_names.size(); ++i) {
    if (joint_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

SkeletonTopology default_topology() {
  SkeletonTopology topo;
  topo.joint_names = {
      "hip_center",     "spine",          "shoulder_center", "head",
      "shoulder_left",  "elbow_left",     "wrist_left",      "hand_left",
      "shoulder_right", "elbow_right",    "wrist_right",     "hand_right",
      "hip_left",       "knee_left",      "ankle_left",      "foot_left",
      "hip_right",      "knee_right",     "ankle_right",     "foot_right",
  };
  topo.reference_joint = 0;  // hip_center

  auto j = [&topo](const char* name) { return topo.joint_index(name); };
  const int hip_center = j("hip_center"), spine = j("spine");
  const int shoulder_center = j("shoulder_center"), head = j("head");
  const int shoulder_left = j("shoulder_left"), elbow_left = j("elbow_left");
  const int wrist_left = j("wrist_left"), hand_left = j("hand_left");
  const int shoulder_right = j("shoulder_right"), elbow_right = j("elbow_right");
  const int wrist_right = j("wrist_right"), hand_right = j("hand_right");
  const int hip_left = j("hip_left"), knee_left = j("knee_left");
  const int ankle_left = j("ankle_left"), foot_left = j("foot_left");
  const int hip_right = j("hip_right"), knee_right = j("knee_right");
  const int ankle_right = j("ankle_right"), foot_right = j("foot_right");

  // 35 triplets: single-limb flexion angles first, then torso/head posture,
  // then inter-limb spans that separate two-handed from one-handed motion.
  topo.angle_triplets = {
      {shoulder_left, elbow_left, wrist_left},
      {shoulder_right, elbow_right, wrist_right},
      {elbow_left, wrist_left, hand_left},
      {elbow_right, wrist_right, hand_right},
      {shoulder_center, shoulder_left, elbow_left},
      {shoulder_center, shoulder_right, elbow_right},
      {spine, shoulder_center, head},
      {shoulder_left, shoulder_center, head},
      {shoulder_right, shoulder_center, head},
      {hip_center, spine, shoulder_center},
      {spine, hip_center, hip_left},
      {spine, hip_center, hip_right},
      {hip_center, hip_left, knee_left},
      {hip_center, hip_right, knee_right},
      {hip_left, knee_left, ankle_left},
      {hip_right, knee_right, ankle_right},
      {knee_left, ankle_left, foot_left},
      {knee_right, ankle_right, foot_right},
      {elbow_left, shoulder_left, hip_center},
      {elbow_right, shoulder_right, hip_center},
      {shoulder_left, shoulder_center, spine},
      {shoulder_right, shoulder_center, spine},
      {hand_left, head, hand_right},
      {hand_left, shoulder_center, hand_right},
      {hand_left, hip_center, hand_right},
      {hand_left, spine, hand_right},
      {knee_left, hip_center, knee_right},
      {ankle_left, hip_center, ankle_right},
      {wrist_left, shoulder_left, hip_left},
      {wrist_right, shoulder_right, hip_right},
      {hand_left, elbow_left, shoulder_left},
      {hand_right, elbow_right, shoulder_right},
      {foot_left, knee_left, hip_left},
      {foot_right, knee_right, hip_right},
      {head, spine, hip_center},
  };
  return topo;
}

bool annotation_valid(const Annotation& a) {
  if (a.class_id < 0) return false;
  if (a.start_frame < 0 || a.end_frame < a.start_frame) return false;
  if (a.action_point) {
    if (*a.action_point < a.start_frame || *a.action_point > a.end_frame) return false;
  }
  return true;
}

ValidationResult validate_sequence(const SkeletonSequence& seq, const SkeletonTopology& topo) {
  ValidationResult r;
  if (!(seq.fps > 0.0)) {
    r.violations.push_back({-1, "fps must be positive"});
  }
  const int expected_joints = topo.joint_count();
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const SkeletonFrame& f = seq.frames[i];
    const FrameIndex pos = static_cast<FrameIndex>(i);
    if (f.index != pos) {
      r.violations.push_back(
          {pos, "frame index " + std::to_string(f.index) + " at position " + std::to_string(i) +
                    " (indices must run 0,1,2,...)"});
    }
    if (static_cast<int>(f.joints.size()) != expected_joints) {
      r.violations.push_back({pos, "expected " + std::to_string(expected_joints) + " joints, got " +
                                       std::to_string(f.joints.size())});
      continue;
    }
    for (std::size_t k = 0; k < f.joints.size(); ++k) {
      const Joint& jt = f.joints[k];
      if (!std::isfinite(jt.x) || !std::isfinite(jt.y) || !std::isfinite(jt.z)) {
        r.violations.push_back({pos, "non-finite coordinate at joint " + std::to_string(k)});
        break;
      }
    }
  }
  return r;
}

ValidationResult validate_topology(const SkeletonTopology& topo) {
  ValidationResult r;
  const int n = topo.joint_count();
  if (n == 0) {
    r.violations.push_back({-1, "topology has no joints"});
    return r;
  }
  if (topo.reference_joint < 0 || topo.reference_joint >= n) {
    r.violations.push_back({-1, "reference joint out of range"});
  }
  for (std::size_t i = 0; i < topo.angle_triplets.size(); ++i) {
    const AngleTriplet& t = topo.angle_triplets[i];
    const bool in_range = t.a >= 0 && t.a < n && t.b >= 0 && t.b < n && t.vertex >= 0 && t.vertex < n;
    if (!in_range) {
      r.violations.push_back({-1, "triplet " + std::to_string(i) + " references unknown joints"});
      continue;
    }
    if (t.a == t.vertex || t.b == t.vertex) {
      r.violations.push_back({-1, "triplet " + std::to_string(i) + " endpoint equals its vertex"});
    }
  }
  return r;
}

}  // namespace bog
