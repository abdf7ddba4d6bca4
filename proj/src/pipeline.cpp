#include "bog/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "bog/errors.hpp"
#include "bog/io.hpp"
#include "bog/synthetic.hpp"

namespace fs = std::filesystem;

namespace bog {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw DataError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

long long to_int(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    bad_value(key, value, "a non-negative integer");
  }
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "a number");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "a boolean");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& p : split_list(value)) out.push_back(static_cast<int>(to_int(key, p)));
  if (out.empty()) bad_value(key, value, "a comma-separated integer list");
  return out;
}

std::vector<std::uint64_t> to_u64_list(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> out;
  for (const std::string& p : split_list(value)) out.push_back(to_u64(key, p));
  if (out.empty()) bad_value(key, value, "a comma-separated integer list");
  return out;
}

HardNegativeMode parse_hard_negative_mode(const std::string& name) {
  if (name == "instance_plus_pause") return HardNegativeMode::instance_plus_pause;
  if (name == "two_instance_concat") return HardNegativeMode::two_instance_concat;
  throw DataError("unknown hard-negative mode '" + name + "'");
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string sequence_stem(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "seq_%03d", i);
  return buf;
}

SkeletonSequence load_one_sequence(const std::string& path, const PipelineConfig& cfg,
                                   int joint_count) {
  if (cfg.format == "skeleton_text") return load_sequence_text(path, joint_count, cfg.fps);
  return load_sequence_native(path, joint_count, {}, cfg.fps);
}

std::vector<ClassModel> load_models_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("model directory " + dir + " does not exist");
  std::vector<ClassModel> models;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("model_", 0) == 0 && e.path().extension() == ".txt") {
      models.push_back(load_model(e.path().string()));
    }
  }
  if (models.empty()) throw DataError("no model_*.txt files in " + dir);
  std::sort(models.begin(), models.end(),
            [](const ClassModel& a, const ClassModel& b) { return a.class_id < b.class_id; });
  return models;
}

/// Maximal unannotated frame runs of an n-frame sequence.
std::vector<Interval> gap_spans(const std::vector<Annotation>& annotations, FrameIndex n) {
  std::vector<Interval> covered;
  for (const Annotation& a : annotations) {
    const FrameIndex s = std::max<FrameIndex>(a.start_frame, 0);
    const FrameIndex e = std::min<FrameIndex>(a.end_frame, n - 1);
    if (s <= e) covered.push_back({s, e});
  }
  std::sort(covered.begin(), covered.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> gaps;
  FrameIndex cursor = 0;
  for (const Interval& c : covered) {
    if (c.start > cursor) gaps.push_back({cursor, c.start - 1});
    cursor = std::max(cursor, c.end + 1);
  }
  if (cursor <= n - 1) gaps.push_back({cursor, n - 1});
  return gaps;
}

double best_run_in(const Vector& scores, FrameIndex start, FrameIndex end) {
  const FrameIndex n = static_cast<FrameIndex>(scores.size());
  const FrameIndex a = std::max<FrameIndex>(start, 0);
  const FrameIndex b = std::min<FrameIndex>(end, n - 1);
  if (a > b) return -std::numeric_limits<double>::infinity();
  const std::span<const double> view(scores.data() + a, static_cast<std::size_t>(b - a + 1));
  return kadane_max_subarray(view).sum;
}

/// 1 / mean histogram norm. Training on h * scale conditions the solver
/// (norms near 1 make its norm-based step size useful); multiplying the
/// learned weights by the same scale afterwards gives a model in raw
/// histogram units, so scoring and the per-frame decomposition see nothing.
double feature_scale(std::span<const Histogram> histograms) {
  double total = 0.0;
  std::size_t n = 0;
  for (const Histogram& h : histograms) {
    total += norm(h);
    ++n;
  }
  if (n == 0 || total <= 0.0) return 1.0;
  return static_cast<double>(n) / total;
}

Histogram scaled(const Histogram& h, double s) {
  Histogram out = h;
  for (double& v : out) v *= s;
  return out;
}

void sort_events(std::vector<DetectionEvent>& events) {
  std::sort(events.begin(), events.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
    if (a.trigger_frame != b.trigger_frame) return a.trigger_frame < b.trigger_frame;
    if (a.start_frame != b.start_frame) return a.start_frame < b.start_frame;
    return a.class_id < b.class_id;
  });
}

}  // namespace

void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  auto positive_int = [&](int lo = 1) {
    const long long v = to_int(key, value);
    if (v < lo) bad_value(key, value, "an integer in range");
    return static_cast<int>(v);
  };
  auto positive_double = [&] {
    const double v = to_double(key, value);
    if (!(v > 0.0)) bad_value(key, value, "a positive number");
    return v;
  };

  if (key == "preset") {
    if (value == "action3d") {
      cfg.descriptor.alpha = 1.0;
      cfg.descriptor.beta = 1.0;
      cfg.descriptor.psi = 1.7;
      cfg.smoothing.window = 3;
    } else if (value == "msrc12") {
      cfg.descriptor.alpha = 0.375;
      cfg.descriptor.beta = 0.3;
      cfg.descriptor.psi = 0.2;
      cfg.smoothing.window = 5;
    } else {
      bad_value(key, value, "action3d or msrc12");
    }
  } else if (key == "alpha") {
    cfg.descriptor.alpha = positive_double();
  } else if (key == "beta") {
    cfg.descriptor.beta = positive_double();
  } else if (key == "psi") {
    cfg.descriptor.psi = positive_double();
  } else if (key == "window_half") {
    cfg.descriptor.window_half = positive_int();
  } else if (key == "k") {
    cfg.k = positive_int(2);
  } else if (key == "m") {
    cfg.m = positive_int();
  } else if (key == "codebook_seed") {
    cfg.codebook_seed = to_u64(key, value);
  } else if (key == "subsample") {
    cfg.subsample = positive_double();
    if (cfg.subsample > 1.0) bad_value(key, value, "a fraction in (0, 1]");
  } else if (key == "kmeans_max_iters") {
    cfg.kmeans_max_iters = positive_int();
  } else if (key == "kmeans_tol") {
    cfg.kmeans_tol = positive_double();
  } else if (key == "reg") {
    cfg.classifier.reg = positive_double();
  } else if (key == "epochs") {
    cfg.classifier.epochs = positive_int();
  } else if (key == "positive_weight") {
    cfg.classifier.positive_weight = positive_double();
  } else if (key == "hard_negatives") {
    if (value != "none" && value != "both") parse_hard_negative_mode(value);
    cfg.hard_negatives = value;
  } else if (key == "smoothing_window") {
    cfg.smoothing.window = positive_int();
    if (cfg.smoothing.window % 2 == 0) bad_value(key, value, "an odd window");
  } else if (key == "anchor_weighted") {
    cfg.smoothing.anchor_weighted = to_bool(key, value);
  } else if (key == "patience") {
    cfg.patience = positive_int();
  } else if (key == "protocol") {
    if (value == "overlap") {
      cfg.eval.protocol = Protocol::overlap;
    } else if (value == "action_point") {
      cfg.eval.protocol = Protocol::action_point;
    } else {
      bad_value(key, value, "overlap or action_point");
    }
  } else if (key == "latency_frames") {
    cfg.eval.latency_frames = positive_int(0);
  } else if (key == "min_overlap") {
    cfg.eval.min_overlap = positive_double();
    if (cfg.eval.min_overlap > 1.0) bad_value(key, value, "a ratio in (0, 1]");
  } else if (key == "start_as_action_points") {
    cfg.start_as_action_points = to_bool(key, value);
  } else if (key == "train_dir") {
    cfg.train_dir = value;
  } else if (key == "test_dir") {
    cfg.test_dir = value;
  } else if (key == "format") {
    if (value != "skeleton_text" && value != "dataset_native") {
      bad_value(key, value, "skeleton_text or dataset_native");
    }
    cfg.format = value;
  } else if (key == "fps") {
    cfg.fps = positive_double();
  } else if (key == "topology") {
    cfg.topology_path = value;
  } else if (key == "codebook_path") {
    cfg.codebook_path = value;
  } else if (key == "models_dir") {
    cfg.models_dir = value;
  } else if (key == "detections_dir") {
    cfg.detections_dir = value;
  } else if (key == "report_prefix") {
    cfg.report_prefix = value;
  } else if (key == "descriptor_dir") {
    cfg.descriptor_dir = value;
  } else if (key == "synth_classes") {
    cfg.synth_classes = positive_int();
  } else if (key == "synth_train_sequences") {
    cfg.synth_train_sequences = positive_int();
  } else if (key == "synth_test_sequences") {
    cfg.synth_test_sequences = positive_int();
  } else if (key == "synth_instances_per_class") {
    cfg.synth_instances_per_class = positive_int();
  } else if (key == "synth_seed") {
    cfg.synth_seed = to_u64(key, value);
  } else if (key == "synth_noise") {
    const double v = to_double(key, value);
    if (v < 0.0) bad_value(key, value, "a non-negative sigma");
    cfg.synth_noise = v;
  } else if (key == "synth_instance_min") {
    cfg.synth_instance_min = positive_int();
  } else if (key == "synth_instance_max") {
    cfg.synth_instance_max = positive_int();
  } else if (key == "synth_pause_min") {
    cfg.synth_pause_min = positive_int();
  } else if (key == "synth_pause_max") {
    cfg.synth_pause_max = positive_int();
  } else if (key == "bench_frames") {
    cfg.bench_frames = static_cast<std::size_t>(positive_int(100));
  } else if (key == "bench_factor") {
    cfg.bench_factor = positive_int(2);
  } else if (key == "bench_reps") {
    cfg.bench_reps = positive_int();
  } else if (key == "bench_out") {
    cfg.bench_out = value;
  } else if (key == "sweep_k") {
    cfg.sweep_k = to_int_list(key, value);
  } else if (key == "sweep_m") {
    cfg.sweep_m = to_int_list(key, value);
  } else if (key == "sweep_seeds") {
    cfg.sweep_seeds = to_u64_list(key, value);
  } else if (key == "sweep_out_dir") {
    cfg.sweep_out_dir = value;
  } else {
    throw DataError("unknown config key '" + key + "'");
  }
}

void apply_config_map(PipelineConfig& cfg, const std::map<std::string, std::string>& values) {
  const auto preset = values.find("preset");
  if (preset != values.end()) apply_config_value(cfg, preset->first, preset->second);
  for (const auto& [key, value] : values) {
    if (key == "preset") continue;
    apply_config_value(cfg, key, value);
  }
}

PipelineConfig load_pipeline_config(const std::string& path) {
  PipelineConfig cfg;
  if (!path.empty()) apply_config_map(cfg, load_config_file(path));
  return cfg;
}

SkeletonTopology pipeline_topology(const PipelineConfig& cfg) {
  if (cfg.topology_path.empty()) return default_topology();
  return load_topology(cfg.topology_path);
}

Corpus load_corpus(const std::string& dir, const PipelineConfig& cfg, bool need_annotations) {
  if (!fs::is_directory(dir)) throw DataError("corpus directory " + dir + " does not exist");
  const SkeletonTopology topo = pipeline_topology(cfg);
  std::vector<fs::path> files;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".skel") files.push_back(e.path());
  }
  if (files.empty()) throw DataError("no *.skel sequences in " + dir);
  std::sort(files.begin(), files.end());

  Corpus corpus;
  for (const fs::path& f : files) {
    CorpusItem item;
    item.stem = f.stem().string();
    item.sequence = load_one_sequence(f.string(), cfg, topo.joint_count());
    const ValidationResult v = validate_sequence(item.sequence, topo);
    if (!v.ok()) throw DataError(f.string() + ": " + v.violations.front().message);
    const fs::path ann = fs::path(f).replace_extension(".csv");
    if (fs::exists(ann)) {
      item.annotations = load_annotations_csv(ann.string());
    } else if (need_annotations) {
      throw DataError("missing annotation file " + ann.string());
    }
    corpus.items.push_back(std::move(item));
  }
  return corpus;
}

DescribedCorpus describe_corpus(const Corpus& corpus, const SkeletonTopology& topo,
                                const DescriptorParams& params) {
  DescribedCorpus out;
  for (const CorpusItem& item : corpus.items) {
    DescribedItem d;
    d.stem = item.stem;
    d.annotations = item.annotations;
    for (GestureletDescriptor& g : compute_descriptors(item.sequence, topo, params)) {
      d.frames.push_back(std::move(g.values));
    }
    out.items.push_back(std::move(d));
  }
  return out;
}

std::vector<Vector> pool_descriptors(const DescribedCorpus& corpus, double rate,
                                     std::uint64_t seed) {
  std::vector<Vector> pool;
  for (const DescribedItem& item : corpus.items) {
    pool.insert(pool.end(), item.frames.begin(), item.frames.end());
  }
  if (rate < 1.0 && !pool.empty()) {
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(seed ^ 0x51a9b2c3d4e5f607ULL);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t keep =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rate * pool.size())));
    std::vector<Vector> sampled;
    sampled.reserve(keep);
    for (std::size_t i = 0; i < keep && i < order.size(); ++i) {
      sampled.push_back(std::move(pool[order[i]]));
    }
    pool = std::move(sampled);
  }
  return pool;
}

std::vector<AnnotatedEncoding> encode_corpus(const DescribedCorpus& corpus,
                                             const Codebook& codebook, int m) {
  std::vector<AnnotatedEncoding> out;
  for (const DescribedItem& item : corpus.items) {
    AnnotatedEncoding enc;
    enc.annotations = item.annotations;
    enc.frames.reserve(item.frames.size());
    for (const Vector& d : item.frames) enc.frames.push_back(soft_assign(d, codebook, m));
    out.push_back(std::move(enc));
  }
  return out;
}

std::vector<ClassModel> train_models(std::span<const AnnotatedEncoding> collection,
                                     const PipelineConfig& cfg) {
  const int k = cfg.k;
  std::set<int> class_set;
  for (const AnnotatedEncoding& item : collection) {
    for (const Annotation& a : item.annotations) class_set.insert(a.class_id);
  }
  if (class_set.empty()) throw DataError("training corpus has no annotations");

  // Span histograms shared across all one-vs-all problems. Detection scores
  // arbitrary sub-intervals, so whole instances are not enough: each
  // instance also contributes sliding sub-windows as positives (every phase
  // of the action must clear the margin on its own, keeping per-frame scores
  // positive across the whole instance, not just where one discriminative
  // cluster fires), and unannotated gaps contribute sliding sub-windows as
  // background negatives (pause frames must score negative so accumulated
  // runs do not bleed across instance boundaries). class_id -1 marks
  // background spans, negative for every class.
  struct Instance {
    Histogram h;
    int class_id;
  };
  constexpr FrameIndex kMinSubSpan = 8;
  std::vector<Instance> instances;
  auto add_windows = [&](const std::vector<SoftAssignment>& frames, FrameIndex s, FrameIndex e,
                         int class_id) {
    instances.push_back({span_histogram(frames, s, e, k), class_id});
    const FrameIndex len = e - s + 1;
    const FrameIndex win = std::max(kMinSubSpan, len / 4);
    if (win < len) {
      const FrameIndex stride = std::max<FrameIndex>(1, win / 2);
      for (FrameIndex ps = s; ps + win - 1 <= e; ps += stride) {
        instances.push_back({span_histogram(frames, ps, ps + win - 1, k), class_id});
      }
    }
  };
  for (const AnnotatedEncoding& item : collection) {
    const FrameIndex n = static_cast<FrameIndex>(item.frames.size());
    for (const Annotation& a : item.annotations) {
      const FrameIndex s = std::max<FrameIndex>(a.start_frame, 0);
      const FrameIndex e = std::min<FrameIndex>(a.end_frame, n - 1);
      if (s > e) continue;
      add_windows(item.frames, s, e, a.class_id);
    }
    for (const Interval& g : gap_spans(item.annotations, n)) {
      if (g.end - g.start + 1 < kMinSubSpan) continue;
      add_windows(item.frames, g.start, g.end, -1);
    }
  }

  std::vector<Histogram> hard;
  std::vector<int> hard_sources;
  auto add_hard = [&](HardNegativeMode mode) {
    std::vector<int> sources;
    std::vector<Histogram> hs = make_hard_negatives(collection, mode, k, &sources);
    hard.insert(hard.end(), std::make_move_iterator(hs.begin()), std::make_move_iterator(hs.end()));
    hard_sources.insert(hard_sources.end(), sources.begin(), sources.end());
  };
  if (cfg.hard_negatives == "both") {
    add_hard(HardNegativeMode::instance_plus_pause);
    add_hard(HardNegativeMode::two_instance_concat);
  } else if (cfg.hard_negatives != "none") {
    add_hard(parse_hard_negative_mode(cfg.hard_negatives));
  }

  std::vector<Histogram> all_histograms;
  for (const Instance& inst : instances) all_histograms.push_back(inst.h);
  all_histograms.insert(all_histograms.end(), hard.begin(), hard.end());
  const double scale = feature_scale(all_histograms);

  std::vector<ClassModel> models;
  for (int c : class_set) {
    TrainingSet ts;
    for (const Instance& inst : instances) {
      TrainingItem item;
      item.histogram = scaled(inst.h, scale);
      item.positive = inst.class_id == c;
      item.provenance = item.positive ? Provenance::natural_positive : Provenance::natural_negative;
      item.source_class = inst.class_id;
      ts.items.push_back(std::move(item));
    }
    for (std::size_t i = 0; i < hard.size(); ++i) {
      TrainingItem item;
      item.histogram = scaled(hard[i], scale);
      item.positive = false;
      item.provenance = Provenance::hard_negative;
      item.source_class = hard_sources[i];
      ts.items.push_back(std::move(item));
    }
    const LinearModel lm = train_linear(ts, cfg.classifier);

    ClassModel model;
    model.class_id = c;
    model.weights = lm.weights;
    for (double& w : model.weights) w *= scale;
    model.bias = lm.bias;

    // Threshold calibration: what would the detector accumulate inside each
    // training span? Own-class instances are the positives; other-class
    // instances and unannotated gaps the negatives. Own-class hard-negative
    // spans are excluded on purpose: they contain a genuine instance, so
    // their best sub-run matches the positives and would only push the
    // threshold above them.
    std::vector<double> pos, neg;
    for (const AnnotatedEncoding& item : collection) {
      if (item.frames.empty()) continue;
      const ScoreArray sm = smooth(frame_scores(item.frames, model), cfg.smoothing);
      const FrameIndex n = static_cast<FrameIndex>(sm.scores.size());
      for (const Annotation& a : item.annotations) {
        const double s = best_run_in(sm.scores, a.start_frame, a.end_frame);
        if (std::isinf(s)) continue;
        (a.class_id == c ? pos : neg).push_back(s);
      }
      for (const Interval& g : gap_spans(item.annotations, n)) {
        neg.push_back(best_run_in(sm.scores, g.start, g.end));
      }
    }
    if (pos.empty()) throw DataError("no usable instance spans for class " + std::to_string(c));
    if (neg.empty()) {
      model.threshold = *std::min_element(pos.begin(), pos.end()) / 2.0;
    } else {
      model.threshold = learn_threshold(pos, neg);
    }
    models.push_back(std::move(model));
  }
  return models;
}

std::vector<DetectionEvent> detect_sequence_offline(const std::vector<SoftAssignment>& frames,
                                                    const std::vector<ClassModel>& models,
                                                    const PipelineConfig& cfg) {
  std::vector<DetectionEvent> events;
  if (frames.empty()) return events;
  for (const ClassModel& model : models) {
    const ScoreArray sm = smooth(frame_scores(frames, model), cfg.smoothing);
    std::vector<DetectionEvent> found = detect_offline(sm, model.threshold);
    events.insert(events.end(), found.begin(), found.end());
  }
  sort_events(events);
  return events;
}

std::vector<DetectionEvent> detect_sequence_online(const SkeletonSequence& seq,
                                                   const SkeletonTopology& topo,
                                                   const Codebook& codebook,
                                                   const std::vector<ClassModel>& models,
                                                   const PipelineConfig& cfg) {
  StreamingDetector det(topo, cfg.descriptor, codebook, models, cfg.m, cfg.smoothing,
                        cfg.patience);
  std::vector<DetectionEvent> events;
  for (const SkeletonFrame& f : seq.frames) {
    std::vector<DetectionEvent> found = det.push(f);
    events.insert(events.end(), found.begin(), found.end());
  }
  std::vector<DetectionEvent> tail = det.finish();
  events.insert(events.end(), tail.begin(), tail.end());
  return events;
}

double recognition_accuracy(std::span<const AnnotatedEncoding> train,
                            std::span<const AnnotatedEncoding> test, int k,
                            const LinearTrainParams& params) {
  std::set<int> class_set;
  for (const AnnotatedEncoding& item : train) {
    for (const Annotation& a : item.annotations) class_set.insert(a.class_id);
  }
  if (class_set.size() < 2) throw DataError("recognition needs at least two training classes");

  struct Instance {
    Histogram h;
    int class_id;
  };
  auto cut_instances = [&](std::span<const AnnotatedEncoding> items) {
    std::vector<Instance> out;
    for (const AnnotatedEncoding& item : items) {
      const FrameIndex n = static_cast<FrameIndex>(item.frames.size());
      for (const Annotation& a : item.annotations) {
        const FrameIndex s = std::max<FrameIndex>(a.start_frame, 0);
        const FrameIndex e = std::min<FrameIndex>(a.end_frame, n - 1);
        if (s > e) continue;
        out.push_back({span_histogram(item.frames, s, e, k), a.class_id});
      }
    }
    return out;
  };
  const std::vector<Instance> train_instances = cut_instances(train);
  const std::vector<Instance> test_instances = cut_instances(test);
  if (test_instances.empty()) return 0.0;

  std::vector<Histogram> all_histograms;
  for (const Instance& inst : train_instances) all_histograms.push_back(inst.h);
  const double scale = feature_scale(all_histograms);

  std::vector<ClassModel> models;
  for (int c : class_set) {
    TrainingSet ts;
    for (const Instance& inst : train_instances) {
      TrainingItem item;
      item.histogram = scaled(inst.h, scale);
      item.positive = inst.class_id == c;
      item.provenance = item.positive ? Provenance::natural_positive : Provenance::natural_negative;
      item.source_class = inst.class_id;
      ts.items.push_back(std::move(item));
    }
    const LinearModel lm = train_linear(ts, params);
    ClassModel model{c, lm.weights, lm.bias, 0.0};
    for (double& w : model.weights) w *= scale;
    models.push_back(std::move(model));
  }

  int correct = 0;
  for (const Instance& inst : test_instances) {
    if (classify_recognition(inst.h, models) == inst.class_id) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_instances.size());
}

void run_synth(const PipelineConfig& cfg, std::ostream& out) {
  if (cfg.synth_instance_min > cfg.synth_instance_max ||
      cfg.synth_pause_min > cfg.synth_pause_max) {
    throw DataError("synthetic length ranges are inverted");
  }
  struct Split {
    const std::string& dir;
    int count;
    std::uint64_t seed_base;
  };
  for (const Split& split : {Split{cfg.train_dir, cfg.synth_train_sequences, cfg.synth_seed},
                             Split{cfg.test_dir, cfg.synth_test_sequences, cfg.synth_seed + 1000}}) {
    fs::create_directories(split.dir);
    int annotations = 0;
    FrameIndex frames = 0;
    for (int i = 0; i < split.count; ++i) {
      SyntheticSpec spec;
      spec.class_count = cfg.synth_classes;
      spec.instance_len_min = cfg.synth_instance_min;
      spec.instance_len_max = cfg.synth_instance_max;
      spec.pause_len_min = cfg.synth_pause_min;
      spec.pause_len_max = cfg.synth_pause_max;
      spec.noise_sigma = cfg.synth_noise;
      spec.seed = split.seed_base + static_cast<std::uint64_t>(i);
      spec.fps = cfg.fps;
      spec.schedule = alternating_schedule(cfg.synth_classes, cfg.synth_instances_per_class);
      const SyntheticResult res = generate_synthetic(spec);
      const std::string stem = sequence_stem(i);
      save_sequence_text(res.sequence, split.dir + "/" + stem + ".skel");
      save_annotations_csv(res.annotations, split.dir + "/" + stem + ".csv");
      annotations += static_cast<int>(res.annotations.size());
      frames += res.sequence.size();
    }
    out << split.dir << ": " << split.count << " sequences, " << frames << " frames, "
        << annotations << " annotated instances\n";
  }
}

void run_extract(const PipelineConfig& cfg, std::ostream& out) {
  const SkeletonTopology topo = pipeline_topology(cfg);
  const Corpus corpus = load_corpus(cfg.train_dir, cfg, false);
  fs::create_directories(cfg.descriptor_dir);
  std::size_t total = 0;
  for (const CorpusItem& item : corpus.items) {
    const std::vector<GestureletDescriptor> descs =
        compute_descriptors(item.sequence, topo, cfg.descriptor);
    save_descriptors(descs, cfg.descriptor_dir + "/" + item.stem + ".desc");
    total += descs.size();
  }
  out << "wrote " << total << " descriptors (dim " << descriptor_length(topo) << ") for "
      << corpus.items.size() << " sequences to " << cfg.descriptor_dir << "\n";
}

Codebook run_train_codebook(const PipelineConfig& cfg, std::ostream& out) {
  const SkeletonTopology topo = pipeline_topology(cfg);
  const Corpus corpus = load_corpus(cfg.train_dir, cfg, false);
  const DescribedCorpus described = describe_corpus(corpus, topo, cfg.descriptor);
  const std::vector<Vector> pool =
      pool_descriptors(described, cfg.subsample, cfg.codebook_seed);
  Codebook cb = train_codebook(pool, cfg.k, cfg.codebook_seed, cfg.kmeans_max_iters,
                               cfg.kmeans_tol);
  cb.subsample_rate = cfg.subsample;
  ensure_parent_dir(cfg.codebook_path);
  save_codebook(cb, cfg.codebook_path);
  out << "codebook: K=" << cb.size() << " dim=" << cb.dim << " from " << pool.size()
      << " descriptors (subsample " << cfg.subsample << ") -> " << cfg.codebook_path << "\n";
  return cb;
}

std::vector<ClassModel> run_train(const PipelineConfig& cfg, std::ostream& out) {
  const SkeletonTopology topo = pipeline_topology(cfg);
  const Codebook cb = load_codebook(cfg.codebook_path);
  if (cb.dim != descriptor_length(topo)) {
    throw DataError("codebook dim " + std::to_string(cb.dim) + " does not match descriptor length " +
                    std::to_string(descriptor_length(topo)));
  }
  PipelineConfig local = cfg;
  local.k = cb.size();
  const Corpus corpus = load_corpus(cfg.train_dir, cfg, true);
  const DescribedCorpus described = describe_corpus(corpus, topo, cfg.descriptor);
  const std::vector<AnnotatedEncoding> encoded = encode_corpus(described, cb, cfg.m);
  const std::vector<ClassModel> models = train_models(encoded, local);
  fs::create_directories(cfg.models_dir);
  for (const ClassModel& m : models) {
    save_model(m, cfg.models_dir + "/model_" + std::to_string(m.class_id) + ".txt");
    out << "class " << m.class_id << ": threshold " << format_double(m.threshold) << "\n";
  }
  out << models.size() << " models -> " << cfg.models_dir << "\n";
  return models;
}

void run_detect(const PipelineConfig& cfg, bool online, std::ostream& out) {
  const SkeletonTopology topo = pipeline_topology(cfg);
  const Codebook cb = load_codebook(cfg.codebook_path);
  if (cb.dim != descriptor_length(topo)) {
    throw DataError("codebook dim " + std::to_string(cb.dim) + " does not match descriptor length " +
                    std::to_string(descriptor_length(topo)));
  }
  const std::vector<ClassModel> models = load_models_dir(cfg.models_dir);
  const Corpus corpus = load_corpus(cfg.test_dir, cfg, false);
  fs::create_directories(cfg.detections_dir);
  std::size_t total = 0;
  for (const CorpusItem& item : corpus.items) {
    std::vector<DetectionEvent> events;
    if (online) {
      events = detect_sequence_online(item.sequence, topo, cb, models, cfg);
    } else {
      Corpus one;
      one.items.push_back(item);
      const DescribedCorpus described = describe_corpus(one, topo, cfg.descriptor);
      const std::vector<AnnotatedEncoding> encoded = encode_corpus(described, cb, cfg.m);
      events = detect_sequence_offline(encoded.front().frames, models, cfg);
    }
    save_detections_csv(events, cfg.detections_dir + "/" + item.stem + ".det.csv");
    out << item.stem << ": " << events.size() << " events\n";
    total += events.size();
  }
  out << total << " events (" << (online ? "online" : "offline") << ") -> "
      << cfg.detections_dir << "\n";
}

EvalReport run_eval(const PipelineConfig& cfg, std::ostream& out) {
  const Corpus corpus = load_corpus(cfg.test_dir, cfg, true);
  std::vector<SequenceEval> evals;
  for (const CorpusItem& item : corpus.items) {
    const std::string det_path = cfg.detections_dir + "/" + item.stem + ".det.csv";
    if (!fs::exists(det_path)) {
      throw DataError("missing detections " + det_path + " (run detect first)");
    }
    SequenceEval se;
    se.events = load_detections_csv(det_path);
    se.annotations =
        cfg.start_as_action_points ? start_frames_as_action_points(item.annotations)
                                   : item.annotations;
    evals.push_back(std::move(se));
  }
  const EvalReport report = evaluate(evals, cfg.eval);

  std::ostringstream table;
  table << "class        tp    fp    fn  precision  recall       F\n";
  char row[128];
  for (const ClassReport& c : report.per_class) {
    std::snprintf(row, sizeof(row), "%-10d %4d  %4d  %4d     %6.3f  %6.3f  %6.3f\n", c.class_id,
                  c.tp, c.fp, c.fn, c.prf.precision, c.prf.recall, c.prf.f);
    table << row;
  }
  std::snprintf(row, sizeof(row), "mean F %.4f   std %.4f", report.mean_f, report.std_f);
  table << row;
  if (report.mean_ap) {
    std::snprintf(row, sizeof(row), "   mean AP %.4f", *report.mean_ap);
    table << row;
  }
  table << "\n";
  out << table.str();

  ensure_parent_dir(cfg.report_prefix + ".txt");
  {
    std::ofstream txt(cfg.report_prefix + ".txt");
    txt << table.str();
  }
  {
    std::ofstream csv(cfg.report_prefix + ".csv");
    csv << "class,tp,fp,fn,precision,recall,f\n";
    for (const ClassReport& c : report.per_class) {
      csv << c.class_id << ',' << c.tp << ',' << c.fp << ',' << c.fn << ','
          << format_double(c.prf.precision) << ',' << format_double(c.prf.recall) << ','
          << format_double(c.prf.f) << '\n';
    }
  }
  {
    nlohmann::json j;
    j["protocol"] = cfg.eval.protocol == Protocol::overlap ? "overlap" : "action_point";
    if (cfg.eval.protocol == Protocol::overlap) j["min_overlap"] = cfg.eval.min_overlap;
    if (cfg.eval.protocol == Protocol::action_point) j["latency_frames"] = cfg.eval.latency_frames;
    j["mean_f"] = report.mean_f;
    j["std_f"] = report.std_f;
    if (report.mean_ap) j["mean_ap"] = *report.mean_ap;
    j["per_class"] = nlohmann::json::array();
    for (const ClassReport& c : report.per_class) {
      j["per_class"].push_back({{"class", c.class_id},
                                {"tp", c.tp},
                                {"fp", c.fp},
                                {"fn", c.fn},
                                {"precision", c.prf.precision},
                                {"recall", c.prf.recall},
                                {"f", c.prf.f}});
    }
    std::ofstream json_out(cfg.report_prefix + ".json");
    json_out << j.dump(2) << '\n';
  }
  return report;
}

void run_bench(const PipelineConfig& cfg, std::ostream& out) {
  using clock = std::chrono::steady_clock;
  const SkeletonTopology topo = default_topology();
  const int dim = descriptor_length(topo);

  // Streaming cost: a pause-only stream long enough for the big variant,
  // scored against a fixed random codebook and all-negative models so no
  // event ever fires. What matters is the per-frame cost ratio between the
  // short and long runs, not absolute throughput.
  const std::size_t long_frames = cfg.bench_frames * static_cast<std::size_t>(cfg.bench_factor);
  SyntheticSpec spec;
  spec.class_count = 1;
  spec.pause_len_min = spec.pause_len_max = 1000;
  spec.noise_sigma = 0.01;
  spec.seed = 99;
  spec.schedule.assign(long_frames / 1000 + 1, kPauseToken);
  const SyntheticResult stream = generate_synthetic(spec);

  const int bench_k = 64;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Codebook cb;
  cb.dim = dim;
  cb.seed = 4242;
  for (int c = 0; c < bench_k; ++c) {
    Vector v(dim);
    for (double& x : v) x = unit(rng);
    cb.centroids.push_back(std::move(v));
  }
  std::vector<ClassModel> models;
  for (int c = 0; c < 3; ++c) {
    ClassModel m;
    m.class_id = c;
    m.weights.resize(bench_k);
    for (double& w : m.weights) w = -0.1 - 0.9 * (unit(rng) * 0.5 + 0.5);
    m.threshold = 1e18;
    models.push_back(std::move(m));
  }

  auto time_stream = [&](std::size_t n_frames) {
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < cfg.bench_reps; ++rep) {
      StreamingDetector det(topo, cfg.descriptor, cb, models, cfg.m, cfg.smoothing, cfg.patience);
      const auto t0 = clock::now();
      for (std::size_t i = 0; i < n_frames; ++i) det.push(stream.sequence.frames[i]);
      det.finish();
      const auto t1 = clock::now();
      const double us =
          std::chrono::duration<double, std::micro>(t1 - t0).count() / static_cast<double>(n_frames);
      best = std::min(best, us);
    }
    return best;
  };
  const double short_us = time_stream(cfg.bench_frames);
  const double long_us = time_stream(long_frames);
  const double stream_ratio = long_us / short_us;

  // Offline cost: event count held fixed while N doubles, so the masking
  // rescans do not add an extra factor of N.
  const std::size_t n_base = 200000;
  const int bumps = 20;
  auto make_scores = [&](std::size_t n) {
    ScoreArray sa;
    sa.class_id = 0;
    sa.scores.assign(n, -0.1);
    const std::size_t spacing = n / static_cast<std::size_t>(bumps);
    for (int b = 0; b < bumps; ++b) {
      const std::size_t at = spacing * static_cast<std::size_t>(b) + spacing / 2;
      for (std::size_t i = at; i < at + 50 && i < n; ++i) sa.scores[i] = 1.0;
    }
    return sa;
  };
  auto time_offline = [&](std::size_t n) {
    const ScoreArray sa = make_scores(n);
    double best = std::numeric_limits<double>::infinity();
    std::size_t events = 0;
    for (int rep = 0; rep < cfg.bench_reps; ++rep) {
      ScoreArray copy = sa;
      const auto t0 = clock::now();
      const std::vector<DetectionEvent> ev = detect_offline(copy, 25.0);
      const auto t1 = clock::now();
      events = ev.size();
      best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return std::pair<double, std::size_t>(best, events);
  };
  const auto [off_base_ms, off_base_events] = time_offline(n_base);
  const auto [off_double_ms, off_double_events] = time_offline(2 * n_base);
  const double offline_ratio = off_double_ms / off_base_ms;

  out << "streaming: " << cfg.bench_frames << " frames at " << short_us << " us/frame, "
      << long_frames << " frames at " << long_us << " us/frame, ratio " << stream_ratio << " ("
      << 1e6 / long_us << " frames/s)\n";
  out << "offline: N=" << n_base << " in " << off_base_ms << " ms (" << off_base_events
      << " events), N=" << 2 * n_base << " in " << off_double_ms << " ms (" << off_double_events
      << " events), ratio " << offline_ratio << "\n";

  ensure_parent_dir(cfg.bench_out);
  std::ofstream csv(cfg.bench_out);
  csv << "metric,value\n";
  csv << "stream_short_frames," << cfg.bench_frames << "\n";
  csv << "stream_short_us_per_frame," << format_double(short_us) << "\n";
  csv << "stream_long_frames," << long_frames << "\n";
  csv << "stream_long_us_per_frame," << format_double(long_us) << "\n";
  csv << "stream_ratio," << format_double(stream_ratio) << "\n";
  csv << "stream_frames_per_second," << format_double(1e6 / long_us) << "\n";
  csv << "offline_base_ms," << format_double(off_base_ms) << "\n";
  csv << "offline_double_ms," << format_double(off_double_ms) << "\n";
  csv << "offline_ratio," << format_double(offline_ratio) << "\n";
}

void run_sweep(const PipelineConfig& cfg, std::ostream& out) {
  const SkeletonTopology topo = pipeline_topology(cfg);
  const Corpus train_corpus = load_corpus(cfg.train_dir, cfg, true);
  const Corpus test_corpus = load_corpus(cfg.test_dir, cfg, true);
  const DescribedCorpus train_desc = describe_corpus(train_corpus, topo, cfg.descriptor);
  const DescribedCorpus test_desc = describe_corpus(test_corpus, topo, cfg.descriptor);
  const std::vector<Vector> pool =
      pool_descriptors(train_desc, cfg.subsample, cfg.codebook_seed);

  fs::create_directories(cfg.sweep_out_dir);

  {
    std::ofstream csv(cfg.sweep_out_dir + "/k_sweep.csv");
    csv << "k,accuracy\n";
    for (int k : cfg.sweep_k) {
      const Codebook cb =
          train_codebook(pool, k, cfg.codebook_seed, cfg.kmeans_max_iters, cfg.kmeans_tol);
      const std::vector<AnnotatedEncoding> train_enc = encode_corpus(train_desc, cb, cfg.m);
      const std::vector<AnnotatedEncoding> test_enc = encode_corpus(test_desc, cb, cfg.m);
      const double acc = recognition_accuracy(train_enc, test_enc, k, cfg.classifier);
      csv << k << ',' << format_double(acc) << '\n';
      out << "k=" << k << " accuracy " << acc << "\n";
    }
  }

  {
    std::ofstream csv(cfg.sweep_out_dir + "/m_sweep.csv");
    std::ofstream summary(cfg.sweep_out_dir + "/m_sweep_summary.csv");
    csv << "m,seed,accuracy\n";
    summary << "m,mean,std\n";
    std::vector<Codebook> books;
    for (std::uint64_t seed : cfg.sweep_seeds) {
      books.push_back(train_codebook(pool, cfg.k, seed, cfg.kmeans_max_iters, cfg.kmeans_tol));
    }
    for (int m : cfg.sweep_m) {
      std::vector<double> accs;
      for (std::size_t i = 0; i < books.size(); ++i) {
        const std::vector<AnnotatedEncoding> train_enc = encode_corpus(train_desc, books[i], m);
        const std::vector<AnnotatedEncoding> test_enc = encode_corpus(test_desc, books[i], m);
        const double acc = recognition_accuracy(train_enc, test_enc, cfg.k, cfg.classifier);
        accs.push_back(acc);
        csv << m << ',' << cfg.sweep_seeds[i] << ',' << format_double(acc) << '\n';
      }
      const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / accs.size();
      double var = 0.0;
      for (double a : accs) var += (a - mean) * (a - mean);
      const double sd = accs.size() > 1 ? std::sqrt(var / (accs.size() - 1)) : 0.0;
      summary << m << ',' << format_double(mean) << ',' << format_double(sd) << '\n';
      out << "m=" << m << " mean accuracy " << mean << " std " << sd << "\n";
    }
  }
}

}  // namespace bog
