#pragma once

#include <utility>

#include "bog/skeleton.hpp"
#include "bog/vec.hpp"

namespace bog {

/// Relative vector norms below this are treated as degenerate (joint sitting
/// on the reference joint, or an entire pose collapsed onto it).
inline constexpr double kDegenerateNormEpsilon = 1e-8;

struct DescriptorParams {
  double alpha = 1.0;  ///< weight of the velocity block
  double beta = 1.0;   ///< weight of the acceleration block
  double psi = 1.7;    ///< weight of the two angle blocks
  /// Temporal half-window of the derivative stencils. The second difference
  /// reaches +-window_half frames, the first difference +-ceil(window_half/2).
  /// The default 2 gives the 5-frame stencils dX(t) = X(t+1) - X(t-1) and
  /// d2X(t) = X(t+2) + X(t-2) - 2 X(t).
  int window_half = 2;

  bool valid() const { return alpha > 0.0 && beta > 0.0 && psi > 0.0 && window_half >= 1; }
};

/// Stencil offsets (first difference, second difference) for the params.
std::pair<int, int> derivative_offsets(const DescriptorParams& params);

struct GestureletDescriptor {
  FrameIndex frame_index = 0;
  Vector values;
};

/// Pose vector: every joint minus the reference joint, flattened to 3J
/// values and scaled to unit Euclidean norm. A pose whose relative norm is
/// below kDegenerateNormEpsilon comes back as all zeros. Invariant to
/// translating the whole frame and to scaling it about the reference joint.
Vector normalize_pose(const SkeletonFrame& frame, const SkeletonTopology& topo);

/// One angle in [0, pi] per topology triplet, measured at the vertex between
/// the rays toward the two endpoints. A ray shorter than
/// kDegenerateNormEpsilon yields angle 0.
Vector compute_angles(const SkeletonFrame& frame, const SkeletonTopology& topo);

/// Expected descriptor length: 9*J + 2*A (three 3J pose blocks plus two
/// angle blocks).
int descriptor_length(const SkeletonTopology& topo);

/// Gesturelet at frame t:
///   [ P(t), alpha*dP(t), beta*d2P(t), psi*Theta(t), psi*dTheta(t) ]
/// where P is the normalized pose and Theta the triplet angles. Derivatives
/// are central differences of the normalized quantities, with frame indices
/// clamped to [0, len-1] so the descriptor is defined at every frame of the
/// stream, including frame 0.
GestureletDescriptor compute_descriptor(const SkeletonSequence& seq, FrameIndex t,
                                        const SkeletonTopology& topo, const DescriptorParams& params);

/// Batch variant: descriptors for every frame, sharing the per-frame pose
/// and angle computations. Element t equals compute_descriptor(seq, t, ...).
std::vector<GestureletDescriptor> compute_descriptors(const SkeletonSequence& seq,
                                                      const SkeletonTopology& topo,
                                                      const DescriptorParams& params);

/// Stencil assembly shared by the batch and streaming paths. Callers resolve
/// clamped frame indices themselves: p0/th0 belong to frame t, pm1/pp1 and
/// thm1/thp1 to t -+ the first-difference offset, pm2/pp2 to t -+ the
/// second-difference offset.
Vector assemble_descriptor(const Vector& p0, const Vector& pm1, const Vector& pp1,
                           const Vector& pm2, const Vector& pp2, const Vector& th0,
                           const Vector& thm1, const Vector& thp1, const DescriptorParams& params);

}  // namespace bog
