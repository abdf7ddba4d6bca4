#pragma once

#include <cstdint>

#include "bog/descriptor.hpp"
#include "bog/vec.hpp"

namespace bog {

struct Codebook {
  int dim = 0;
  std::uint64_t seed = 0;
  /// Fraction of the training descriptors the codebook was fit on (the
  /// pipeline may subsample before clustering); recorded for provenance.
  double subsample_rate = 1.0;
  std::vector<Vector> centroids;

  int size() const { return static_cast<int>(centroids.size()); }
};

/// k-means with Euclidean distance. Deterministic for a fixed seed: the
/// first centroid is drawn from the seed, the rest by farthest-point
/// traversal (ties to the lower index); Lloyd iterations stop when the
/// largest centroid movement drops below `tol` or after `max_iters`.
/// Clusters that come up empty are re-seeded from the point farthest from
/// its assigned centroid. Requires k >= 2 and at least k descriptors.
Codebook train_codebook(const std::vector<Vector>& descriptors, int k, std::uint64_t seed,
                        int max_iters = 100, double tol = 1e-6);

struct Vote {
  int cluster = 0;
  double weight = 0.0;
};

/// Votes for the m nearest centroids, nearest first. The i-th nearest (i
/// 1-based) gets raw weight 1/i; distance ties rank the lower cluster index
/// first. Requires 1 <= m <= K.
using SoftAssignment = std::vector<Vote>;
SoftAssignment soft_assign(std::span<const double> descriptor, const Codebook& codebook, int m);

/// Bag-of-gesturelets histogram: entry k accumulates every vote weight cast
/// for cluster k. With n assignments of m votes each the total mass is
/// n * (1 + 1/2 + ... + 1/m).
using Histogram = Vector;
Histogram build_histogram(std::span<const SoftAssignment> assignments, int k);

/// Per-frame soft assignments for a whole sequence (descriptor + soft_assign
/// per frame).
std::vector<SoftAssignment> encode_sequence(const SkeletonSequence& seq,
                                            const SkeletonTopology& topo,
                                            const DescriptorParams& params,
                                            const Codebook& codebook, int m);

/// Histogram over the closed frame range [start, end] of an encoded
/// sequence. Histograms are additive, so any span histogram is the sum of
/// its frames' votes.
Histogram span_histogram(const std::vector<SoftAssignment>& frames, FrameIndex start,
                         FrameIndex end, int k);

}  // namespace bog
