#pragma once

#include <cstdint>

#include "bog/codebook.hpp"
#include "bog/skeleton.hpp"
#include "bog/vec.hpp"

namespace bog {

/// One-vs-all linear classifier for a single action class, plus the firing
/// threshold the detector compares accumulated scores against.
struct ClassModel {
  int class_id = 0;
  Vector weights;
  double bias = 0.0;
  double threshold = 0.0;

  int k() const { return static_cast<int>(weights.size()); }
};

enum class Provenance { natural_positive, natural_negative, hard_negative };

struct TrainingItem {
  Histogram histogram;
  bool positive = false;
  Provenance provenance = Provenance::natural_negative;
  /// Class the span was cut from (annotation class for instance spans and
  /// hard negatives); -1 when not applicable.
  int source_class = -1;
};

struct TrainingSet {
  std::vector<TrainingItem> items;
};

struct LinearTrainParams {
  double reg = 1e-4;   ///< coefficient of the ||w||^2 penalty
  int epochs = 2000;   ///< full-batch subgradient iterations
  std::uint64_t seed = 0;  ///< reserved; the batch solver has no stochastic component
  double positive_weight = 1.0;  ///< loss multiplier for positive items
};

struct LinearModel {
  Vector weights;
  double bias = 0.0;
};

/// Minimizes mean weighted hinge loss plus reg*||w||^2 with deterministic
/// full-batch subgradient descent (bias unregularized). Because every step
/// uses the dataset mean subgradient and the returned iterate is the one
/// with the lowest exact objective, duplicating the training set leaves the
/// trajectory, and hence the model, unchanged up to rounding. Requires at
/// least one positive and one negative item with consistent dimensions.
LinearModel train_linear(const TrainingSet& ts, const LinearTrainParams& params);

/// Exact objective train_linear minimizes; exposed for tests.
double linear_objective(const TrainingSet& ts, const LinearTrainParams& params, const Vector& w,
                        double bias);

/// Decision threshold minimizing (#pos below) + (#neg at-or-above) over a
/// candidate set containing the midpoints of adjacent distinct scores plus
/// one guard below the minimum and one above the maximum (the error count is
/// piecewise constant, and those candidates cover every piece, so the result
/// is optimal over all reals). Ties return the largest candidate. Both lists
/// must be non-empty.
double learn_threshold(const std::vector<double>& positive_scores,
                       const std::vector<double>& negative_scores);

/// w . h + bias. Dimension mismatch throws.
double score_histogram(const Histogram& h, const ClassModel& model);

/// Argmax of score_histogram over the models; score ties pick the lower
/// class_id. Requires a non-empty model list.
int classify_recognition(const Histogram& h, const std::vector<ClassModel>& models);

enum class HardNegativeMode {
  /// One span per (instance, following inter-instance gap) pair:
  /// [instance start, frame before the next instance].
  instance_plus_pause,
  /// One span per adjacent same-class instance pair:
  /// [first instance start, second instance end].
  two_instance_concat,
};

struct FrameSpan {
  FrameIndex start = 0;
  FrameIndex end = 0;
  int source_class = -1;
};

/// Hard-negative spans for one annotated sequence. Annotations are sorted by
/// start frame internally; an inapplicable mode (no inter-instance gaps, or
/// no adjacent same-class pairs) yields an empty list.
std::vector<FrameSpan> hard_negative_spans(std::vector<Annotation> annotations,
                                           HardNegativeMode mode);

/// Encoded sequence plus its annotations; the unit hard-negative mining and
/// model training consume.
struct AnnotatedEncoding {
  std::vector<SoftAssignment> frames;
  std::vector<Annotation> annotations;
};

/// Hard-negative histograms across a collection, with per-item source
/// classes appended to *source_classes when given.
std::vector<Histogram> make_hard_negatives(std::span<const AnnotatedEncoding> collection,
                                           HardNegativeMode mode, int k,
                                           std::vector<int>* source_classes = nullptr);

}  // namespace bog
