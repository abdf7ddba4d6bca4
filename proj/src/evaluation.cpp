#include "bog/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace bog {

double overlap_ratio(Interval a, Interval b) {
  if (a.end < a.start || b.end < b.start) {
    throw std::invalid_argument("overlap_ratio: malformed interval");
  }
  const FrameIndex inter_start = std::max(a.start, b.start);
  const FrameIndex inter_end = std::min(a.end, b.end);
  if (inter_end < inter_start) return 0.0;
  const double inter = static_cast<double>(inter_end - inter_start + 1);
  const double len_a = static_cast<double>(a.end - a.start + 1);
  const double len_b = static_cast<double>(b.end - b.start + 1);
  return inter / (len_a + len_b - inter);
}

namespace {

// Matching quality of event vs annotation under the protocol, or nullopt
// when the pair does not satisfy it. Higher is better.
std::optional<double> match_quality(const DetectionEvent& ev, const Annotation& ann,
                                    const EvalConfig& cfg) {
  if (ev.class_id != ann.class_id) return std::nullopt;
  if (cfg.protocol == Protocol::action_point) {
    if (!ann.action_point) return std::nullopt;
    const FrameIndex d = std::llabs(ev.trigger_frame - *ann.action_point);
    if (d > cfg.latency_frames) return std::nullopt;
    return -static_cast<double>(d);
  }
  const double r = overlap_ratio({ev.start_frame, ev.end_frame}, {ann.start_frame, ann.end_frame});
  if (r < cfg.min_overlap) return std::nullopt;
  return r;
}

}  // namespace

MatchResult match_detections(std::span<const DetectionEvent> events,
                             std::span<const Annotation> annotations, const EvalConfig& cfg) {
  MatchResult r;
  std::vector<bool> matched(annotations.size(), false);
  for (std::size_t e = 0; e < events.size(); ++e) {
    std::size_t best_a = annotations.size();
    double best_q = 0.0;
    for (std::size_t a = 0; a < annotations.size(); ++a) {
      if (matched[a]) continue;
      const auto q = match_quality(events[e], annotations[a], cfg);
      if (!q) continue;
      if (best_a == annotations.size() || *q > best_q) {
        best_a = a;
        best_q = *q;
      }
    }
    if (best_a < annotations.size()) {
      matched[best_a] = true;
      r.tp++;
      r.matches.emplace_back(e, best_a);
    } else {
      r.fp++;
    }
  }
  r.fn = static_cast<int>(annotations.size()) - r.tp;
  return r;
}

PRF fscore(int tp, int fp, int fn) {
  PRF out;
  out.precision = (tp + fp > 0) ? static_cast<double>(tp) / (tp + fp) : 0.0;
  out.recall = (tp + fn > 0) ? static_cast<double>(tp) / (tp + fn) : 0.0;
  out.f = (out.precision + out.recall > 0.0)
              ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
              : 0.0;
  return out;
}

EvalReport evaluate(std::span<const SequenceEval> sequences, const EvalConfig& cfg) {
  std::map<int, ClassReport> per_class;
  auto entry = [&per_class](int class_id) -> ClassReport& {
    auto [it, inserted] = per_class.try_emplace(class_id);
    if (inserted) it->second.class_id = class_id;
    return it->second;
  };

  for (const SequenceEval& se : sequences) {
    std::vector<DetectionEvent> events = se.events;
    std::sort(events.begin(), events.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
      return a.trigger_frame != b.trigger_frame ? a.trigger_frame < b.trigger_frame
                                                : a.start_frame < b.start_frame;
    });
    const MatchResult m = match_detections(events, se.annotations, cfg);
    std::vector<bool> event_matched(events.size(), false);
    std::vector<bool> ann_matched(se.annotations.size(), false);
    for (const auto& [e, a] : m.matches) {
      event_matched[e] = true;
      ann_matched[a] = true;
      entry(events[e].class_id).tp++;
    }
    for (std::size_t e = 0; e < events.size(); ++e) {
      if (!event_matched[e]) entry(events[e].class_id).fp++;
    }
    for (std::size_t a = 0; a < se.annotations.size(); ++a) {
      if (!ann_matched[a]) entry(se.annotations[a].class_id).fn++;
    }
  }

  EvalReport report;
  double sum_f = 0.0;
  for (auto& [class_id, cr] : per_class) {
    cr.prf = fscore(cr.tp, cr.fp, cr.fn);
    sum_f += cr.prf.f;
    report.per_class.push_back(cr);
  }
  const std::size_t n = report.per_class.size();
  if (n > 0) {
    report.mean_f = sum_f / static_cast<double>(n);
    if (n > 1) {
      double ss = 0.0;
      for (const ClassReport& cr : report.per_class) {
        const double d = cr.prf.f - report.mean_f;
        ss += d * d;
      }
      report.std_f = std::sqrt(ss / static_cast<double>(n - 1));
    }
  }
  if (cfg.protocol == Protocol::overlap) {
    report.mean_ap = mean_average_precision(sequences, cfg.min_overlap);
  }
  return report;
}

double mean_average_precision(std::span<const SequenceEval> sequences, double min_overlap) {
  std::set<int> classes;
  for (const SequenceEval& se : sequences) {
    for (const Annotation& a : se.annotations) classes.insert(a.class_id);
  }
  if (classes.empty()) return 0.0;

  double ap_sum = 0.0;
  for (int class_id : classes) {
    struct RankedEvent {
      double score;
      std::size_t seq;
      DetectionEvent ev;
    };
    std::vector<RankedEvent> ranked;
    std::size_t positives = 0;
    for (std::size_t s = 0; s < sequences.size(); ++s) {
      for (const DetectionEvent& ev : sequences[s].events) {
        if (ev.class_id == class_id) ranked.push_back({ev.score, s, ev});
      }
      for (const Annotation& a : sequences[s].annotations) {
        if (a.class_id == class_id) positives++;
      }
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedEvent& a, const RankedEvent& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.seq != b.seq) return a.seq < b.seq;
      return a.ev.start_frame < b.ev.start_frame;
    });

    std::vector<std::vector<bool>> matched(sequences.size());
    for (std::size_t s = 0; s < sequences.size(); ++s) {
      matched[s].assign(sequences[s].annotations.size(), false);
    }
    std::size_t tp = 0, fp = 0;
    double ap = 0.0, prev_recall = 0.0;
    for (const RankedEvent& re : ranked) {
      const auto& anns = sequences[re.seq].annotations;
      std::size_t best_a = anns.size();
      double best_r = 0.0;
      for (std::size_t a = 0; a < anns.size(); ++a) {
        if (matched[re.seq][a] || anns[a].class_id != class_id) continue;
        const double r = overlap_ratio({re.ev.start_frame, re.ev.end_frame},
                                       {anns[a].start_frame, anns[a].end_frame});
        if (r < min_overlap) continue;
        if (best_a == anns.size() || r > best_r) {
          best_a = a;
          best_r = r;
        }
      }
      if (best_a < anns.size()) {
        matched[re.seq][best_a] = true;
        tp++;
        const double recall = static_cast<double>(tp) / static_cast<double>(positives);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
      } else {
        fp++;
      }
    }
    ap_sum += ap;
  }
  return ap_sum / static_cast<double>(classes.size());
}

}  // namespace bog
