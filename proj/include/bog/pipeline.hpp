#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "bog/classifier.hpp"
#include "bog/codebook.hpp"
#include "bog/descriptor.hpp"
#include "bog/detector.hpp"
#include "bog/evaluation.hpp"
#include "bog/skeleton.hpp"

namespace bog {

/// Every tunable of the end-to-end pipeline, with shipped defaults. Loaded
/// from a flat key = value file; any key can be overridden on the command
/// line. See apply_config_value for the key list.
struct PipelineConfig {
  // descriptor
  DescriptorParams descriptor;

  // codebook
  int k = 2500;
  int m = 3;
  std::uint64_t codebook_seed = 7;
  double subsample = 1.0;  ///< fraction of training descriptors clustered
  int kmeans_max_iters = 100;
  double kmeans_tol = 1e-6;

  // classifier
  LinearTrainParams classifier;
  /// none | instance_plus_pause | two_instance_concat | both
  std::string hard_negatives = "instance_plus_pause";

  // detector
  SmoothingParams smoothing;
  int patience = 1;

  // evaluation
  EvalConfig eval;
  bool start_as_action_points = false;

  // data
  std::string train_dir = "data/train";
  std::string test_dir = "data/test";
  std::string format = "skeleton_text";  ///< skeleton_text | dataset_native
  double fps = 30.0;
  std::string topology_path;  ///< empty = built-in 20-joint topology

  // artifacts
  std::string codebook_path = "artifacts/codebook.txt";
  std::string models_dir = "artifacts/models";
  std::string detections_dir = "artifacts/detections";
  std::string report_prefix = "artifacts/report";
  std::string descriptor_dir = "artifacts/descriptors";

  // synthetic generator
  int synth_classes = 3;
  int synth_train_sequences = 4;
  int synth_test_sequences = 4;
  int synth_instances_per_class = 3;  ///< per sequence
  std::uint64_t synth_seed = 1;
  double synth_noise = 0.001;
  int synth_instance_min = 40;
  int synth_instance_max = 60;
  int synth_pause_min = 20;
  int synth_pause_max = 40;

  // bench
  std::size_t bench_frames = 10000;
  int bench_factor = 4;
  int bench_reps = 3;
  std::string bench_out = "artifacts/bench.csv";

  // sweep
  std::vector<int> sweep_k{50, 100, 200, 400};
  std::vector<int> sweep_m{1, 2, 3, 5};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};
  std::string sweep_out_dir = "artifacts";
};

/// Sets one key. "preset" selects a named default bundle
/// (action3d: alpha=1 beta=1 psi=1.7; msrc12: alpha=0.375 beta=0.3 psi=0.2).
/// Unknown keys and unparseable values throw DataError.
void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Applies a whole key/value map, handling "preset" before everything else
/// so explicit keys win over preset values.
void apply_config_map(PipelineConfig& cfg, const std::map<std::string, std::string>& values);

/// Defaults, then the file (empty path = defaults only).
PipelineConfig load_pipeline_config(const std::string& path);

/// The topology the config selects: topology_path when set, otherwise the
/// built-in 20-joint layout.
SkeletonTopology pipeline_topology(const PipelineConfig& cfg);

/// One sequence/annotation pair on disk: <stem>.skel next to <stem>.csv.
struct CorpusItem {
  std::string stem;
  SkeletonSequence sequence;
  std::vector<Annotation> annotations;
};

struct Corpus {
  std::vector<CorpusItem> items;
};

/// Loads every *.skel in dir (sorted by name) with its annotation CSV.
/// Missing annotations throw when need_annotations, otherwise load empty.
Corpus load_corpus(const std::string& dir, const PipelineConfig& cfg, bool need_annotations);

/// Per-item descriptor matrices, computed once and reused across codebook
/// retrainings (descriptors do not depend on K, m, or seeds).
struct DescribedItem {
  std::string stem;
  std::vector<Vector> frames;  ///< one descriptor per frame
  std::vector<Annotation> annotations;
};

struct DescribedCorpus {
  std::vector<DescribedItem> items;
};

DescribedCorpus describe_corpus(const Corpus& corpus, const SkeletonTopology& topo,
                                const DescriptorParams& params);

/// All descriptors pooled for clustering, optionally subsampled (a
/// deterministic shuffle keyed on `seed` keeps the first rate * n).
std::vector<Vector> pool_descriptors(const DescribedCorpus& corpus, double rate,
                                     std::uint64_t seed);

std::vector<AnnotatedEncoding> encode_corpus(const DescribedCorpus& corpus,
                                             const Codebook& codebook, int m);

/// One-vs-all models with firing thresholds for every class annotated in the
/// collection, sorted by class_id. Hard negatives per cfg.hard_negatives.
/// Thresholds are calibrated on smoothed per-frame scores: positives are the
/// best accumulation inside each own-class instance span, negatives the best
/// accumulation inside other-class instances and unannotated gaps.
std::vector<ClassModel> train_models(std::span<const AnnotatedEncoding> collection,
                                     const PipelineConfig& cfg);

/// Offline detection over one encoded sequence: per class, per-frame scores,
/// smoothing, repeated masked max-subarray; events merged across classes and
/// sorted by trigger frame.
std::vector<DetectionEvent> detect_sequence_offline(const std::vector<SoftAssignment>& frames,
                                                    const std::vector<ClassModel>& models,
                                                    const PipelineConfig& cfg);

/// Online detection over one raw sequence through the streaming path.
std::vector<DetectionEvent> detect_sequence_online(const SkeletonSequence& seq,
                                                   const SkeletonTopology& topo,
                                                   const Codebook& codebook,
                                                   const std::vector<ClassModel>& models,
                                                   const PipelineConfig& cfg);

/// Fraction of test instances whose span histogram the one-vs-all models
/// classify correctly. Models are trained on the train collection's instance
/// histograms alone (no hard negatives; recognition has no firing decision).
double recognition_accuracy(std::span<const AnnotatedEncoding> train,
                            std::span<const AnnotatedEncoding> test, int k,
                            const LinearTrainParams& params);

// Command entry points. Each reads and writes the documented artifact files;
// all diagnostics go to `out`.
void run_synth(const PipelineConfig& cfg, std::ostream& out);
void run_extract(const PipelineConfig& cfg, std::ostream& out);
Codebook run_train_codebook(const PipelineConfig& cfg, std::ostream& out);
std::vector<ClassModel> run_train(const PipelineConfig& cfg, std::ostream& out);
void run_detect(const PipelineConfig& cfg, bool online, std::ostream& out);
EvalReport run_eval(const PipelineConfig& cfg, std::ostream& out);
void run_bench(const PipelineConfig& cfg, std::ostream& out);
void run_sweep(const PipelineConfig& cfg, std::ostream& out);

}  // namespace bog
