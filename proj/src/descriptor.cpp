#include "bog/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bog {

std::pair<int, int> derivative_offsets(const DescriptorParams& params) {
  const int d2 = params.window_half;
  const int d1 = (params.window_half + 1) / 2;
  return {d1, d2};
}

Vector normalize_pose(const SkeletonFrame& frame, const SkeletonTopology& topo) {
  const int J = topo.joint_count();
  if (static_cast<int>(frame.joints.size()) != J) {
    throw std::invalid_argument("normalize_pose: frame joint count does not match topology");
  }
  const Joint& ref = frame.joints[topo.reference_joint];
  Vector v(static_cast<std::size_t>(3 * J));
  for (int j = 0; j < J; ++j) {
    const Joint& p = frame.joints[j];
    v[3 * j + 0] = p.x - ref.x;
    v[3 * j + 1] = p.y - ref.y;
    v[3 * j + 2] = p.z - ref.z;
  }
  const double n = norm(v);
  if (n < kDegenerateNormEpsilon) {
    std::fill(v.begin(), v.end(), 0.0);
    return v;
  }
  for (double& x : v) x /= n;
  return v;
}

Vector compute_angles(const SkeletonFrame& frame, const SkeletonTopology& topo) {
  const int J = topo.joint_count();
  if (static_cast<int>(frame.joints.size()) != J) {
    throw std::invalid_argument("compute_angles: frame joint count does not match topology");
  }
  Vector out(topo.angle_triplets.size());
  for (std::size_t i = 0; i < topo.angle_triplets.size(); ++i) {
    const AngleTriplet& t = topo.angle_triplets[i];
    const Joint& v = frame.joints[t.vertex];
    const Joint& a = frame.joints[t.a];
    const Joint& b = frame.joints[t.b];
    const double ux = a.x - v.x, uy = a.y - v.y, uz = a.z - v.z;
    const double wx = b.x - v.x, wy = b.y - v.y, wz = b.z - v.z;
    const double nu = std::sqrt(ux * ux + uy * uy + uz * uz);
    const double nw = std::sqrt(wx * wx + wy * wy + wz * wz);
    if (nu < kDegenerateNormEpsilon || nw < kDegenerateNormEpsilon) {
      out[i] = 0.0;
      continue;
    }
    // atan2 of |u x w| against u.w stays accurate near 0 and pi, unlike acos.
    const double cx = uy * wz - uz * wy;
    const double cy = uz * wx - ux * wz;
    const double cz = ux * wy - uy * wx;
    const double cross_norm = std::sqrt(cx * cx + cy * cy + cz * cz);
    out[i] = std::atan2(cross_norm, ux * wx + uy * wy + uz * wz);
  }
  return out;
}

int descriptor_length(const SkeletonTopology& topo) {
  return 9 * topo.joint_count() + 2 * topo.angle_count();
}

Vector assemble_descriptor(const Vector& p0, const Vector& pm1, const Vector& pp1,
                           const Vector& pm2, const Vector& pp2, const Vector& th0,
                           const Vector& thm1, const Vector& thp1, const DescriptorParams& params) {
  Vector out;
  out.reserve(3 * p0.size() + 2 * th0.size());
  for (double x : p0) out.push_back(x);
  for (std::size_t i = 0; i < p0.size(); ++i) out.push_back(params.alpha * (pp1[i] - pm1[i]));
  for (std::size_t i = 0; i < p0.size(); ++i)
    out.push_back(params.beta * (pp2[i] + pm2[i] - 2.0 * p0[i]));
  for (double x : th0) out.push_back(params.psi * x);
  for (std::size_t i = 0; i < th0.size(); ++i) out.push_back(params.psi * (thp1[i] - thm1[i]));
  return out;
}

namespace {

FrameIndex clamp_frame(FrameIndex t, FrameIndex len) {
  return std::clamp<FrameIndex>(t, 0, len - 1);
}

}  // namespace

GestureletDescriptor compute_descriptor(const SkeletonSequence& seq, FrameIndex t,
                                        const SkeletonTopology& topo,
                                        const DescriptorParams& params) {
  if (seq.empty()) throw std::invalid_argument("compute_descriptor: empty sequence");
  if (!params.valid()) throw std::invalid_argument("compute_descriptor: invalid params");
  const FrameIndex len = static_cast<FrameIndex>(seq.size());
  if (t < 0 || t >= len) throw std::out_of_range("compute_descriptor: frame out of range");

  const auto [d1, d2] = derivative_offsets(params);
  auto pose = [&](FrameIndex u) { return normalize_pose(seq.frames[clamp_frame(u, len)], topo); };
  auto angles = [&](FrameIndex u) { return compute_angles(seq.frames[clamp_frame(u, len)], topo); };

  GestureletDescriptor d;
  d.frame_index = t;
  d.values = assemble_descriptor(pose(t), pose(t - d1), pose(t + d1), pose(t - d2), pose(t + d2),
                                 angles(t), angles(t - d1), angles(t + d1), params);
  return d;
}

std::vector<GestureletDescriptor> compute_descriptors(const SkeletonSequence& seq,
                                                      const SkeletonTopology& topo,
                                                      const DescriptorParams& params) {
  if (seq.empty()) throw std::invalid_argument("compute_descriptors: empty sequence");
  if (!params.valid()) throw std::invalid_argument("compute_descriptors: invalid params");
  const FrameIndex len = static_cast<FrameIndex>(seq.size());
  const auto [d1, d2] = derivative_offsets(params);

  std::vector<Vector> poses(seq.size());
  std::vector<Vector> angs(seq.size());
  for (FrameIndex t = 0; t < len; ++t) {
    poses[t] = normalize_pose(seq.frames[t], topo);
    angs[t] = compute_angles(seq.frames[t], topo);
  }

  std::vector<GestureletDescriptor> out(seq.size());
  for (FrameIndex t = 0; t < len; ++t) {
    auto P = [&](FrameIndex u) -> const Vector& { return poses[clamp_frame(u, len)]; };
    auto Th = [&](FrameIndex u) -> const Vector& { return angs[clamp_frame(u, len)]; };
    out[t].frame_index = t;
    out[t].values = assemble_descriptor(P(t), P(t - d1), P(t + d1), P(t - d2), P(t + d2), Th(t),
                                        Th(t - d1), Th(t + d1), params);
  }
  return out;
}

}  // namespace bog
