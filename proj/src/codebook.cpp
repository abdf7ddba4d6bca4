#include "bog/codebook.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace bog {

namespace {

// Index of the largest value, ties to the lower index.
std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

Codebook train_codebook(const std::vector<Vector>& descriptors, int k, std::uint64_t seed,
                        int max_iters, double tol) {
  if (k < 2) throw std::invalid_argument("train_codebook: k must be >= 2");
  const std::size_t n = descriptors.size();
  if (n < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("train_codebook: fewer descriptors than clusters");
  }
  const std::size_t dim = descriptors[0].size();
  for (const Vector& d : descriptors) {
    if (d.size() != dim) throw std::invalid_argument("train_codebook: inconsistent dimensions");
  }

  // Farthest-point seeding: seed picks the first centroid, each next one is
  // the point with the largest distance to the chosen set.
  std::mt19937_64 rng(seed);
  std::vector<Vector> centroids;
  centroids.reserve(k);
  const std::size_t first = static_cast<std::size_t>(rng() % n);
  centroids.push_back(descriptors[first]);
  std::vector<double> min_dist(n);
  for (std::size_t i = 0; i < n; ++i) min_dist[i] = squared_distance(descriptors[i], centroids[0]);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    const std::size_t next = argmax(min_dist);
    centroids.push_back(descriptors[next]);
    for (std::size_t i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], squared_distance(descriptors[i], centroids.back()));
    }
  }

  std::vector<int> assignment(n, 0);
  std::vector<double> dist_to_centroid(n, 0.0);
  for (int iter = 0; iter < max_iters; ++iter) {
    // Assignment step; distance ties go to the lower cluster index.
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(descriptors[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(descriptors[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
      dist_to_centroid[i] = best_d;
    }

    // Update step.
    std::vector<Vector> sums(k, Vector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = assignment[i];
      counts[c]++;
      const Vector& d = descriptors[i];
      Vector& s = sums[c];
      for (std::size_t j = 0; j < dim; ++j) s[j] += d[j];
    }

    double movement = 0.0;
    std::vector<bool> reseeded_point(n, false);
    for (int c = 0; c < k; ++c) {
      Vector updated;
      if (counts[c] == 0) {
        // Re-seed an empty cluster from the point farthest from its
        // assigned centroid (ties to the lower index, each point used once).
        std::size_t far = n;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (!reseeded_point[i] && dist_to_centroid[i] > far_d) {
            far_d = dist_to_centroid[i];
            far = i;
          }
        }
        reseeded_point[far] = true;
        updated = descriptors[far];
      } else {
        updated = sums[c];
        for (double& x : updated) x /= static_cast<double>(counts[c]);
      }
      movement = std::max(movement, std::sqrt(squared_distance(updated, centroids[c])));
      centroids[c] = std::move(updated);
    }
    if (movement < tol) break;
  }

  Codebook cb;
  cb.dim = static_cast<int>(dim);
  cb.seed = seed;
  cb.centroids = std::move(centroids);
  return cb;
}

SoftAssignment soft_assign(std::span<const double> descriptor, const Codebook& codebook, int m) {
  const int k = codebook.size();
  if (m < 1 || m > k) throw std::invalid_argument("soft_assign: m must be in [1, K]");
  if (static_cast<int>(descriptor.size()) != codebook.dim) {
    throw std::invalid_argument("soft_assign: descriptor dimension does not match codebook");
  }

  std::vector<std::pair<double, int>> ranked(k);
  for (int c = 0; c < k; ++c) {
    ranked[c] = {squared_distance(descriptor, codebook.centroids[c]), c};
  }
  // (distance, index) ordering makes equidistant centroids rank by index.
  std::partial_sort(ranked.begin(), ranked.begin() + m, ranked.end());

  SoftAssignment votes(m);
  for (int i = 0; i < m; ++i) {
    votes[i] = {ranked[i].second, 1.0 / static_cast<double>(i + 1)};
  }
  return votes;
}

Histogram build_histogram(std::span<const SoftAssignment> assignments, int k) {
  if (k <= 0) throw std::invalid_argument("build_histogram: k must be positive");
  Histogram h(static_cast<std::size_t>(k), 0.0);
  for (const SoftAssignment& sa : assignments) {
    for (const Vote& v : sa) {
      if (v.cluster < 0 || v.cluster >= k) {
        throw std::invalid_argument("build_histogram: vote cluster out of range");
      }
      h[v.cluster] += v.weight;
    }
  }
  return h;
}

std::vector<SoftAssignment> encode_sequence(const SkeletonSequence& seq,
                                            const SkeletonTopology& topo,
                                            const DescriptorParams& params, const Codebook& codebook,
                                            int m) {
  const std::vector<GestureletDescriptor> descs = compute_descriptors(seq, topo, params);
  std::vector<SoftAssignment> out(descs.size());
  for (std::size_t t = 0; t < descs.size(); ++t) {
    out[t] = soft_assign(descs[t].values, codebook, m);
  }
  return out;
}

Histogram span_histogram(const std::vector<SoftAssignment>& frames, FrameIndex start,
                         FrameIndex end, int k) {
  if (start < 0 || end < start || end >= static_cast<FrameIndex>(frames.size())) {
    throw std::invalid_argument("span_histogram: bad frame range");
  }
  std::span<const SoftAssignment> view(frames.data() + start, static_cast<std::size_t>(end - start + 1));
  return build_histogram(view, k);
}

}  // namespace bog
