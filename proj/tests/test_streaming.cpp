#include <cmath>
#include <random>

#include "bog/codebook.hpp"
#include "bog/detector.hpp"
#include "bog/synthetic.hpp"
#include "doctest.h"

using namespace bog;

namespace {

struct Rig {
  SkeletonSequence seq;
  SkeletonTopology topo = default_topology();
  DescriptorParams params;
  Codebook codebook;
  std::vector<ClassModel> models;
};

// A stream with real structure (three synthetic action instances), a small
// codebook fit on it, and arbitrary linear models that fire often enough to
// exercise every code path.
Rig make_rig(std::uint64_t seed, int k = 8, int classes = 2) {
  Rig rig;
  SyntheticSpec spec;
  spec.seed = seed;
  spec.schedule = {kPauseToken, 0, kPauseToken, 1, kPauseToken, 0, kPauseToken};
  spec.class_count = 2;
  rig.seq = generate_synthetic(spec).sequence;

  std::vector<Vector> descriptors;
  for (const GestureletDescriptor& d : compute_descriptors(rig.seq, rig.topo, rig.params))
    descriptors.push_back(d.values);
  rig.codebook = train_codebook(descriptors, k, seed, 20);

  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> w(-0.3, 0.45);
  for (int c = 0; c < classes; ++c) {
    ClassModel m;
    m.class_id = c;
    m.bias = 0.0;
    m.threshold = 2.0;
    m.weights.resize(k);
    for (double& x : m.weights) x = w(rng);
    rig.models.push_back(m);
  }
  return rig;
}

std::vector<DetectionEvent> run_batch(const Rig& rig, const SmoothingParams& smoothing,
                                      int patience) {
  const std::vector<SoftAssignment> enc =
      encode_sequence(rig.seq, rig.topo, rig.params, rig.codebook, 3);

  std::vector<Vector> smoothed;
  for (const ClassModel& m : rig.models)
    smoothed.push_back(smooth(frame_scores(enc, m), smoothing).scores);

  OnlineDetectorParams op;
  for (const ClassModel& m : rig.models) op.channels.push_back({m.class_id, m.threshold});
  op.patience = patience;
  OnlineDetector det(op);

  std::vector<DetectionEvent> events;
  Vector row(rig.models.size());
  for (std::size_t t = 0; t < rig.seq.size(); ++t) {
    for (std::size_t c = 0; c < smoothed.size(); ++c) row[c] = smoothed[c][t];
    if (auto e = det.push(row)) events.push_back(*e);
  }
  return events;
}

std::vector<DetectionEvent> run_streaming(const Rig& rig, const SmoothingParams& smoothing,
                                          int patience) {
  StreamingDetector det(rig.topo, rig.params, rig.codebook, rig.models, 3, smoothing, patience);
  std::vector<DetectionEvent> events;
  for (const SkeletonFrame& f : rig.seq.frames) {
    for (const DetectionEvent& e : det.push(f)) events.push_back(e);
  }
  for (const DetectionEvent& e : det.finish()) events.push_back(e);
  return events;
}

void check_same_events(const std::vector<DetectionEvent>& a,
                       const std::vector<DetectionEvent>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].class_id == b[i].class_id);
    CHECK(a[i].start_frame == b[i].start_frame);
    CHECK(a[i].end_frame == b[i].end_frame);
    CHECK(a[i].trigger_frame == b[i].trigger_frame);
    CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-9));
  }
}

}  // namespace

TEST_CASE("span scores decompose into per-frame contributions") {
  // The linear model makes a span's score (bias aside) the sum of its
  // frames' individual contributions, whatever the span boundaries.
  const Rig rig = make_rig(11);
  const std::vector<SoftAssignment> enc =
      encode_sequence(rig.seq, rig.topo, rig.params, rig.codebook, 3);
  const int k = rig.codebook.size();

  for (const ClassModel& m : rig.models) {
    const ScoreArray per_frame = frame_scores(enc, m);
    REQUIRE(per_frame.scores.size() == rig.seq.size());
    CHECK(per_frame.class_id == m.class_id);

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, rig.seq.size() - 1);
    for (int trial = 0; trial < 40; ++trial) {
      std::size_t a = pick(rng), b = pick(rng);
      if (a > b) std::swap(a, b);
      double direct = 0.0;
      for (std::size_t t = a; t <= b; ++t) direct += per_frame.scores[t];
      const Histogram h = span_histogram(enc, a, b, k);
      const double via_histogram = dot(h, m.weights);
      CHECK(direct == doctest::Approx(via_histogram).epsilon(1e-9));
    }
  }
}

TEST_CASE("frame score overloads agree") {
  const Rig rig = make_rig(23);
  const std::vector<SoftAssignment> enc =
      encode_sequence(rig.seq, rig.topo, rig.params, rig.codebook, 3);
  const ScoreArray a = frame_scores(enc, rig.models[0]);
  const ScoreArray b =
      frame_scores(rig.seq, rig.topo, rig.codebook, rig.models[0], 3, rig.params);
  REQUIRE(a.scores.size() == b.scores.size());
  for (std::size_t t = 0; t < a.scores.size(); ++t)
    CHECK(a.scores[t] == doctest::Approx(b.scores[t]).epsilon(1e-12));
}

TEST_CASE("streaming detection equals batch detection") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
    for (int window : {1, 3, 5}) {
      for (int patience : {1, 2}) {
        const Rig rig = make_rig(seed);
        SmoothingParams smoothing;
        smoothing.window = window;
        CAPTURE(seed);
        CAPTURE(window);
        CAPTURE(patience);
        const std::vector<DetectionEvent> batch = run_batch(rig, smoothing, patience);
        const std::vector<DetectionEvent> streamed = run_streaming(rig, smoothing, patience);
        // The rigs are tuned to actually fire; an empty pair would make this
        // test vacuous.
        CHECK(!batch.empty());
        check_same_events(batch, streamed);
      }
    }
  }
}

TEST_CASE("finish flushes events pending in the stencil tail") {
  // A stream that ends while a run is still hot: the last frames can only be
  // scored after finish() supplies the clamped future taps.
  Rig rig = make_rig(9);
  // Truncate right after the final instance so the tail pause is short.
  SyntheticSpec spec;
  spec.seed = 9;
  spec.schedule = {kPauseToken, 0};
  spec.class_count = 2;
  rig.seq = generate_synthetic(spec).sequence;

  SmoothingParams smoothing;
  smoothing.window = 5;

  const std::vector<DetectionEvent> batch = run_batch(rig, smoothing, 1);
  StreamingDetector det(rig.topo, rig.params, rig.codebook, rig.models, 3, smoothing, 1);
  std::vector<DetectionEvent> pre;
  for (const SkeletonFrame& f : rig.seq.frames) {
    for (const DetectionEvent& e : det.push(f)) pre.push_back(e);
  }
  const std::vector<DetectionEvent> tail = det.finish();
  std::vector<DetectionEvent> all = pre;
  all.insert(all.end(), tail.begin(), tail.end());
  check_same_events(batch, all);
  CHECK(det.frames_pushed() == static_cast<FrameIndex>(rig.seq.size()));
}

TEST_CASE("streaming detector handles a stream shorter than its stencils") {
  const Rig rig = make_rig(31);
  SmoothingParams smoothing;
  smoothing.window = 5;
  StreamingDetector det(rig.topo, rig.params, rig.codebook, rig.models, 3, smoothing, 1);
  // Three frames: every descriptor tap and smoothing neighbor clamps.
  for (int t = 0; t < 3; ++t) det.push(rig.seq.frames[t]);
  const std::vector<DetectionEvent> tail = det.finish();  // must not crash

  SkeletonSequence short_seq;
  short_seq.frames.assign(rig.seq.frames.begin(), rig.seq.frames.begin() + 3);
  Rig short_rig = rig;
  short_rig.seq = short_seq;
  const std::vector<DetectionEvent> batch = run_batch(short_rig, smoothing, 1);
  check_same_events(batch, tail);
}
