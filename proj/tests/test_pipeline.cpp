#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "bog/errors.hpp"
#include "bog/evaluation.hpp"
#include "bog/pipeline.hpp"
#include "bog/synthetic.hpp"
#include "doctest.h"

using namespace bog;

TEST_CASE("config keys reach their fields") {
  PipelineConfig cfg;
  apply_config_value(cfg, "k", "300");
  CHECK(cfg.k == 300);
  apply_config_value(cfg, "m", "5");
  CHECK(cfg.m == 5);
  apply_config_value(cfg, "alpha", "0.375");
  CHECK(cfg.descriptor.alpha == 0.375);
  apply_config_value(cfg, "patience", "4");
  CHECK(cfg.patience == 4);
  apply_config_value(cfg, "smoothing_window", "7");
  CHECK(cfg.smoothing.window == 7);
  apply_config_value(cfg, "hard_negatives", "two_instance_concat");
  apply_config_value(cfg, "hard_negatives", "none");
  apply_config_value(cfg, "train_dir", "/tmp/somewhere");
  CHECK(cfg.train_dir == "/tmp/somewhere");
  apply_config_value(cfg, "positive_weight", "2.5");
  CHECK(cfg.classifier.positive_weight == 2.5);
  apply_config_value(cfg, "protocol", "action_point");
  CHECK(cfg.eval.protocol == Protocol::action_point);
}

TEST_CASE("config rejects bad values with context") {
  PipelineConfig cfg;
  CHECK_THROWS_AS(apply_config_value(cfg, "k", "1"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "k", "abc"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "m", "0"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "smoothing_window", "4"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "subsample", "0"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "subsample", "1.5"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "min_overlap", "0"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "hard_negatives", "sometimes"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "no_such_key", "1"), DataError);
  CHECK_THROWS_AS(apply_config_value(cfg, "preset", "mystery"), DataError);
}

TEST_CASE("presets are applied before other keys") {
  PipelineConfig cfg;
  std::map<std::string, std::string> values{
      {"preset", "action3d"}, {"psi", "0.5"}};
  apply_config_map(cfg, values);
  // The preset sets alpha/beta/psi; the explicit psi must win regardless of
  // map iteration order.
  CHECK(cfg.descriptor.alpha == 1.0);
  CHECK(cfg.descriptor.beta == 1.0);
  CHECK(cfg.descriptor.psi == 0.5);

  PipelineConfig msrc;
  apply_config_map(msrc, {{"preset", "msrc12"}});
  CHECK(msrc.descriptor.alpha == doctest::Approx(0.375));
  CHECK(msrc.descriptor.beta == doctest::Approx(0.3));
  CHECK(msrc.descriptor.psi == doctest::Approx(0.2));
  CHECK(msrc.smoothing.window == 5);
}

TEST_CASE("default topology is used when no file is configured") {
  PipelineConfig cfg;
  const SkeletonTopology topo = pipeline_topology(cfg);
  CHECK(topo.joint_count() == 20);
  CHECK(topo.angle_count() == 35);
}

TEST_CASE("descriptor pooling and subsampling") {
  SyntheticSpec spec;
  spec.schedule = alternating_schedule(2, 1);
  Corpus corpus;
  CorpusItem item;
  item.stem = "a";
  const SyntheticResult r = generate_synthetic(spec);
  item.sequence = r.sequence;
  item.annotations = r.annotations;
  corpus.items.push_back(item);

  const SkeletonTopology topo = default_topology();
  const DescribedCorpus described = describe_corpus(corpus, topo, DescriptorParams{});
  REQUIRE(described.items.size() == 1);
  CHECK(described.items[0].frames.size() == r.sequence.size());
  CHECK(described.items[0].annotations.size() == r.annotations.size());

  const std::vector<Vector> all = pool_descriptors(described, 1.0, 3);
  CHECK(all.size() == r.sequence.size());

  const std::vector<Vector> half = pool_descriptors(described, 0.5, 3);
  CHECK(half.size() == static_cast<std::size_t>(std::llround(0.5 * all.size())));
  const std::vector<Vector> again = pool_descriptors(described, 0.5, 3);
  CHECK(half == again);
  const std::vector<Vector> other = pool_descriptors(described, 0.5, 4);
  CHECK(half != other);  // different seed, different sample
}

namespace {

// Small but realistic two-class corpus plus the tuned pipeline settings the
// synthetic data is known to separate under.
struct MiniWorld {
  PipelineConfig cfg;
  DescribedCorpus train;
  DescribedCorpus test;
  Codebook codebook;
  SkeletonTopology topo;
};

MiniWorld make_world() {
  MiniWorld w;
  apply_config_map(w.cfg, {{"preset", "msrc12"}, {"k", "24"}, {"m", "3"}});
  w.topo = pipeline_topology(w.cfg);

  auto corpus_for = [&](std::uint64_t seed) {
    Corpus corpus;
    SyntheticSpec spec;
    spec.class_count = 2;
    spec.seed = seed;
    spec.schedule = alternating_schedule(2, 3);
    CorpusItem item;
    item.stem = "seq" + std::to_string(seed);
    const SyntheticResult r = generate_synthetic(spec);
    item.sequence = r.sequence;
    item.annotations = r.annotations;
    corpus.items.push_back(std::move(item));
    return describe_corpus(corpus, w.topo, w.cfg.descriptor);
  };

  w.train = corpus_for(5);
  w.test = corpus_for(1005);
  w.codebook = train_codebook(pool_descriptors(w.train, 1.0, w.cfg.codebook_seed), w.cfg.k,
                              w.cfg.codebook_seed, w.cfg.kmeans_max_iters, w.cfg.kmeans_tol);
  return w;
}

}  // namespace

TEST_CASE("trained models cover the annotated classes with usable thresholds") {
  const MiniWorld w = make_world();
  const std::vector<AnnotatedEncoding> train = encode_corpus(w.train, w.codebook, w.cfg.m);
  const std::vector<ClassModel> models = train_models(train, w.cfg);

  REQUIRE(models.size() == 2);
  CHECK(models[0].class_id == 0);
  CHECK(models[1].class_id == 1);
  for (const ClassModel& m : models) {
    CHECK(m.k() == w.cfg.k);
    CHECK(std::isfinite(m.threshold));
    CHECK(m.threshold > 0.0);
    double wnorm = 0.0;
    for (double x : m.weights) wnorm += x * x;
    CHECK(wnorm > 0.0);
  }
}

TEST_CASE("offline and online pipeline detection find the planted instances") {
  const MiniWorld w = make_world();
  const std::vector<AnnotatedEncoding> train = encode_corpus(w.train, w.codebook, w.cfg.m);
  const std::vector<ClassModel> models = train_models(train, w.cfg);
  const std::vector<AnnotatedEncoding> test = encode_corpus(w.test, w.codebook, w.cfg.m);

  SUBCASE("offline") {
    const std::vector<DetectionEvent> events =
        detect_sequence_offline(test[0].frames, models, w.cfg);
    SequenceEval se{events, test[0].annotations};
    const EvalReport rep = evaluate(std::vector<SequenceEval>{se}, w.cfg.eval);
    CHECK(rep.mean_f >= 0.9);
  }

  SUBCASE("online") {
    // Rebuild the raw sequence for the streaming path.
    SyntheticSpec spec;
    spec.class_count = 2;
    spec.seed = 1005;
    spec.schedule = alternating_schedule(2, 3);
    const SyntheticResult r = generate_synthetic(spec);

    const std::vector<DetectionEvent> events =
        detect_sequence_online(r.sequence, w.topo, w.codebook, models, w.cfg);
    SequenceEval se{events, r.annotations};
    const EvalReport rep = evaluate(std::vector<SequenceEval>{se}, w.cfg.eval);
    CHECK(rep.mean_f >= 0.9);

    // Stream order: events sorted by trigger frame.
    for (std::size_t i = 1; i < events.size(); ++i)
      CHECK(events[i - 1].trigger_frame <= events[i].trigger_frame);
  }
}

TEST_CASE("recognition accuracy is perfect on clean segmented instances") {
  const MiniWorld w = make_world();
  const std::vector<AnnotatedEncoding> train = encode_corpus(w.train, w.codebook, w.cfg.m);
  const std::vector<AnnotatedEncoding> test = encode_corpus(w.test, w.codebook, w.cfg.m);
  const double acc = recognition_accuracy(train, test, w.cfg.k, w.cfg.classifier);
  CHECK(acc == doctest::Approx(1.0));
}
