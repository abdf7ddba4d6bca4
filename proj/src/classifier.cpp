#include "bog/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bog {

namespace {

void check_training_set(const TrainingSet& ts) {
  if (ts.items.empty()) throw std::invalid_argument("train_linear: empty training set");
  const std::size_t dim = ts.items[0].histogram.size();
  if (dim == 0) throw std::invalid_argument("train_linear: zero-dimensional histograms");
  bool has_pos = false, has_neg = false;
  for (const TrainingItem& it : ts.items) {
    if (it.histogram.size() != dim) {
      throw std::invalid_argument("train_linear: inconsistent histogram dimensions");
    }
    (it.positive ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("train_linear: need at least one positive and one negative");
  }
}

}  // namespace

double linear_objective(const TrainingSet& ts, const LinearTrainParams& params, const Vector& w,
                        double bias) {
  double hinge_sum = 0.0;
  for (const TrainingItem& it : ts.items) {
    const double y = it.positive ? 1.0 : -1.0;
    const double c = it.positive ? params.positive_weight : 1.0;
    const double margin = y * (dot(w, it.histogram) + bias);
    if (margin < 1.0) hinge_sum += c * (1.0 - margin);
  }
  return hinge_sum / static_cast<double>(ts.items.size()) + params.reg * dot(w, w);
}

LinearModel train_linear(const TrainingSet& ts, const LinearTrainParams& params) {
  check_training_set(ts);
  if (!(params.reg >= 0.0)) throw std::invalid_argument("train_linear: reg must be >= 0");
  if (params.epochs < 1) throw std::invalid_argument("train_linear: epochs must be >= 1");
  if (!(params.positive_weight > 0.0)) {
    throw std::invalid_argument("train_linear: positive_weight must be > 0");
  }

  const std::size_t n = ts.items.size();
  const std::size_t dim = ts.items[0].histogram.size();

  // Step size normalized by the largest sample norm (bias slot included), so
  // one step moves margins by about one unit regardless of histogram scale.
  double r2 = 1e-12;
  for (const TrainingItem& it : ts.items) {
    r2 = std::max(r2, dot(it.histogram, it.histogram) + 1.0);
  }
  const double eta0 = 1.0 / r2;
  const double decay_epochs = std::max(1.0, params.epochs / 8.0);

  Vector w(dim, 0.0);
  double bias = 0.0;
  Vector grad(dim);
  Vector best_w = w;
  double best_bias = bias;
  double best_obj = linear_objective(ts, params, w, bias);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (const TrainingItem& it : ts.items) {
      const double y = it.positive ? 1.0 : -1.0;
      const double c = it.positive ? params.positive_weight : 1.0;
      const double margin = y * (dot(w, it.histogram) + bias);
      if (margin < 1.0) {
        const double coef = c * y;
        const Histogram& h = it.histogram;
        for (std::size_t j = 0; j < dim; ++j) grad[j] -= coef * h[j];
        grad_bias -= coef;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const double eta = eta0 / (1.0 + epoch / decay_epochs);
    for (std::size_t j = 0; j < dim; ++j) {
      w[j] -= eta * (grad[j] * inv_n + 2.0 * params.reg * w[j]);
    }
    bias -= eta * grad_bias * inv_n;

    const double obj = linear_objective(ts, params, w, bias);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_bias = bias;
    }
  }
  return {std::move(best_w), best_bias};
}

double learn_threshold(const std::vector<double>& positive_scores,
                       const std::vector<double>& negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw std::invalid_argument("learn_threshold: both score lists must be non-empty");
  }
  std::vector<double> merged;
  merged.reserve(positive_scores.size() + negative_scores.size());
  merged.insert(merged.end(), positive_scores.begin(), positive_scores.end());
  merged.insert(merged.end(), negative_scores.begin(), negative_scores.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  std::vector<double> candidates;
  candidates.push_back(merged.front() - 1.0);
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    candidates.push_back(0.5 * (merged[i] + merged[i + 1]));
  }
  candidates.push_back(merged.back() + 1.0);

  auto errors = [&](double theta) {
    std::size_t e = 0;
    for (double s : positive_scores) e += (s < theta) ? 1 : 0;
    for (double s : negative_scores) e += (s >= theta) ? 1 : 0;
    return e;
  };

  double best_theta = candidates.front();
  std::size_t best_err = errors(best_theta);
  for (double theta : candidates) {
    const std::size_t e = errors(theta);
    if (e < best_err || (e == best_err && theta > best_theta)) {
      best_err = e;
      best_theta = theta;
    }
  }
  return best_theta;
}

double score_histogram(const Histogram& h, const ClassModel& model) {
  if (h.size() != model.weights.size()) {
    throw std::invalid_argument("score_histogram: histogram/model dimension mismatch");
  }
  return dot(model.weights, h) + model.bias;
}

int classify_recognition(const Histogram& h, const std::vector<ClassModel>& models) {
  if (models.empty()) throw std::invalid_argument("classify_recognition: no models");
  int best_class = models[0].class_id;
  double best_score = score_histogram(h, models[0]);
  for (std::size_t i = 1; i < models.size(); ++i) {
    const double s = score_histogram(h, models[i]);
    if (s > best_score || (s == best_score && models[i].class_id < best_class)) {
      best_score = s;
      best_class = models[i].class_id;
    }
  }
  return best_class;
}

std::vector<FrameSpan> hard_negative_spans(std::vector<Annotation> annotations,
                                           HardNegativeMode mode) {
  std::sort(annotations.begin(), annotations.end(),
            [](const Annotation& a, const Annotation& b) { return a.start_frame < b.start_frame; });
  std::vector<FrameSpan> spans;
  for (std::size_t i = 0; i + 1 < annotations.size(); ++i) {
    const Annotation& cur = annotations[i];
    const Annotation& next = annotations[i + 1];
    if (mode == HardNegativeMode::instance_plus_pause) {
      // Needs an actual pause: at least one frame between the instances.
      if (next.start_frame > cur.end_frame + 1) {
        spans.push_back({cur.start_frame, next.start_frame - 1, cur.class_id});
      }
    } else {
      if (next.class_id == cur.class_id) {
        spans.push_back({cur.start_frame, next.end_frame, cur.class_id});
      }
    }
  }
  return spans;
}

std::vector<Histogram> make_hard_negatives(std::span<const AnnotatedEncoding> collection,
                                           HardNegativeMode mode, int k,
                                           std::vector<int>* source_classes) {
  std::vector<Histogram> out;
  for (const AnnotatedEncoding& enc : collection) {
    for (const FrameSpan& span : hard_negative_spans(enc.annotations, mode)) {
      out.push_back(span_histogram(enc.frames, span.start, span.end, k));
      if (source_classes) source_classes->push_back(span.source_class);
    }
  }
  return out;
}

}  // namespace bog
