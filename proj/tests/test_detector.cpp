#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bog/detector.hpp"
#include "doctest.h"

using namespace bog;

namespace {

// Quadratic reference: scan every (i, j) pair, keep the greatest sum,
// breaking ties toward the earlier start and then the shorter interval.
// Shares nothing with the scan under test.
SubarrayResult brute_max_subarray(const std::vector<double>& xs) {
  SubarrayResult best{0, 0, xs[0]};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double run = 0.0;
    for (std::size_t j = i; j < xs.size(); ++j) {
      run += xs[j];
      const bool better = run > best.sum;
      const bool tie = run == best.sum &&
                       (i < best.start || (i == best.start && j < best.end));
      if (better || tie) best = {i, j, run};
    }
  }
  return best;
}

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  std::uniform_int_distribution<int> quantize(0, 1);
  std::vector<double> xs(n);
  for (double& x : xs) {
    x = dist(rng);
    // Half the arrays get snapped to 0.5 steps so exact ties actually occur.
    if (quantize(rng)) x = std::round(x * 2.0) / 2.0;
  }
  return xs;
}

}  // namespace

TEST_CASE("max subarray matches hand-worked examples") {
  const std::vector<double> a{1, -2, 3, 4, -1};
  SubarrayResult r = kadane_max_subarray(a);
  CHECK(r.start == 2);
  CHECK(r.end == 3);
  CHECK(r.sum == doctest::Approx(7.0));

  const std::vector<double> all_neg{-1, -2, -3};
  r = kadane_max_subarray(all_neg);
  CHECK(r.start == 0);
  CHECK(r.end == 0);
  CHECK(r.sum == doctest::Approx(-1.0));

  const std::vector<double> single{4.5};
  r = kadane_max_subarray(single);
  CHECK(r.start == 0);
  CHECK(r.end == 0);
  CHECK(r.sum == doctest::Approx(4.5));
}

TEST_CASE("max subarray tie rules: earliest start, then shortest") {
  // Two disjoint intervals with the same sum.
  const std::vector<double> twin{3, -10, 3};
  SubarrayResult r = kadane_max_subarray(twin);
  CHECK(r.start == 0);
  CHECK(r.end == 0);

  // Trailing zero extends without changing the sum; the shorter form wins.
  const std::vector<double> pad{2, 0, -5};
  r = kadane_max_subarray(pad);
  CHECK(r.start == 0);
  CHECK(r.end == 0);
  CHECK(r.sum == doctest::Approx(2.0));

  // Leading zero: [0,1] and [1,1] both sum to 2, earlier start wins.
  const std::vector<double> lead{0, 2, -5};
  r = kadane_max_subarray(lead);
  CHECK(r.start == 0);
  CHECK(r.end == 1);
}

TEST_CASE("max subarray agrees with the quadratic reference") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  for (int trial = 0; trial < 400; ++trial) {
    const std::vector<double> xs = random_scores(rng, len(rng));
    const SubarrayResult got = kadane_max_subarray(xs);
    const SubarrayResult want = brute_max_subarray(xs);
    CAPTURE(trial);
    CHECK(got.start == want.start);
    CHECK(got.end == want.end);
    CHECK(got.sum == doctest::Approx(want.sum).epsilon(1e-12));
  }
}

TEST_CASE("offline detection masks each event and rescans") {
  ScoreArray s;
  s.class_id = 2;
  s.scores = {1, 1, 1, -10, 2, 2, -10, 0.5};
  const std::vector<DetectionEvent> events = detect_offline(s, 2.5);

  REQUIRE(events.size() == 2);
  // Sorted by start frame, not by discovery order (the [4,5] bump has the
  // larger sum and is found first).
  CHECK(events[0].start_frame == 0);
  CHECK(events[0].end_frame == 2);
  CHECK(events[0].score == doctest::Approx(3.0));
  CHECK(events[1].start_frame == 4);
  CHECK(events[1].end_frame == 5);
  CHECK(events[1].score == doctest::Approx(4.0));
  for (const DetectionEvent& e : events) {
    CHECK(e.class_id == 2);
    CHECK(e.trigger_frame == e.end_frame);
  }
}

TEST_CASE("offline detection stops below the threshold") {
  ScoreArray s;
  s.scores = {1, 1, -5, 1};
  CHECK(detect_offline(s, 2.5).empty());
  CHECK(detect_offline(s, 2.0).size() == 1);
}

TEST_CASE("masked regions act as barriers") {
  // The center spike is found first and masked; the flanking bumps are then
  // picked up separately and must not be bridged through the masked frame.
  ScoreArray s;
  s.scores = {1.5, -2, 5, -2, 1.5};
  const std::vector<DetectionEvent> events = detect_offline(s, 1.4);
  REQUIRE(events.size() == 3);
  CHECK(events[0].start_frame == 0);
  CHECK(events[0].score == doctest::Approx(1.5));
  CHECK(events[1].start_frame == 2);
  CHECK(events[1].score == doctest::Approx(5.0));
  CHECK(events[2].start_frame == 4);
  CHECK(events[2].score == doctest::Approx(1.5));
}

TEST_CASE("smoothing weights the anchor by its neighbor count") {
  Vector v{0, 4, 0};
  SmoothingParams p;
  p.window = 3;
  const Vector out = smooth(v, p);
  REQUIRE(out.size() == 3);
  // Interior: (2*4 + 0 + 0) / 4. Edges clamp the missing neighbor onto the
  // anchor: (2*0 + 0 + 4) / 4.
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(2.0));
  CHECK(out[2] == doctest::Approx(1.0));
}

TEST_CASE("window 1 smoothing is the identity") {
  Vector v{3, -1, 2, 7};
  SmoothingParams p;
  p.window = 1;
  CHECK(smooth(v, p) == v);
}

TEST_CASE("uniform smoothing averages the window") {
  Vector v{0, 6, 0};
  SmoothingParams p;
  p.window = 3;
  p.anchor_weighted = false;
  const Vector out = smooth(v, p);
  CHECK(out[1] == doctest::Approx(2.0));
  CHECK(out[0] == doctest::Approx(2.0));  // clamped edge: (0 + 0 + 6) / 3
}

TEST_CASE("smoothing preserves constants") {
  Vector v(17, 3.25);
  for (int w : {1, 3, 5, 7}) {
    SmoothingParams p;
    p.window = w;
    const Vector out = smooth(v, p);
    for (double x : out) CHECK(x == doctest::Approx(3.25));
  }
}

namespace {

OnlineDetector single_channel(double threshold, int patience = 1) {
  OnlineDetectorParams p;
  p.channels = {{0, threshold}};
  p.patience = patience;
  return OnlineDetector(std::move(p));
}

struct Fired {
  std::vector<DetectionEvent> events;
};

Fired feed(OnlineDetector& det, const std::vector<double>& scores) {
  Fired f;
  for (double s : scores) {
    const double row[1] = {s};
    if (auto e = det.push(row)) f.events.push_back(*e);
  }
  return f;
}

}  // namespace

TEST_CASE("online detector: hand-traced run") {
  OnlineDetector det = single_channel(7.0);
  const Fired f = feed(det, {-2, -1, -5, 1, 0, 2, 2, 3, 0, -1});
  // Run starts at frame 3, reaches 8 at frame 7; the 0 at frame 8 keeps the
  // sum at the peak, so the peak frame advances to 8; the -1 fires it.
  REQUIRE(f.events.size() == 1);
  const DetectionEvent& e = f.events[0];
  CHECK(e.start_frame == 3);
  CHECK(e.end_frame == 8);
  CHECK(e.trigger_frame == 9);
  CHECK(e.score == doctest::Approx(8.0));
}

TEST_CASE("online detector: peak below the final sum") {
  OnlineDetector det = single_channel(7.0);
  const Fired f = feed(det, {-1, 5, 5, -2});
  REQUIRE(f.events.size() == 1);
  CHECK(f.events[0].start_frame == 1);
  CHECK(f.events[0].end_frame == 2);
  CHECK(f.events[0].trigger_frame == 3);
  CHECK(f.events[0].score == doctest::Approx(10.0));
}

TEST_CASE("online detector never fires under the threshold") {
  OnlineDetector det = single_channel(100.0);
  const Fired f = feed(det, {5, 5, 5, -1, 5, 5, -1});
  CHECK(f.events.empty());
}

TEST_CASE("online detector patience bridges short dips") {
  // One negative frame inside the run; patience 2 rides it out, patience 1
  // fires immediately.
  const std::vector<double> scores{4, 4, -1, 4, 4, -5, -5};

  OnlineDetector impatient = single_channel(6.0, 1);
  Fired f = feed(impatient, scores);
  REQUIRE(f.events.size() == 2);
  CHECK(f.events[0].end_frame == 1);
  CHECK(f.events[0].score == doctest::Approx(8.0));

  OnlineDetector patient = single_channel(6.0, 2);
  f = feed(patient, scores);
  REQUIRE(f.events.size() == 1);
  CHECK(f.events[0].start_frame == 0);
  CHECK(f.events[0].end_frame == 4);
  CHECK(f.events[0].score == doctest::Approx(15.0));
  CHECK(f.events[0].trigger_frame == 6);
}

TEST_CASE("online detector: armed channel survives a sum dip to zero") {
  // Once armed the channel must not restart even if the running sum goes
  // negative; the recorded peak is what fires.
  OnlineDetector det = single_channel(5.0, 3);
  const Fired f = feed(det, {6, -4, -4, -4, 2});
  REQUIRE(f.events.size() == 1);
  CHECK(f.events[0].start_frame == 0);
  CHECK(f.events[0].end_frame == 0);
  CHECK(f.events[0].score == doctest::Approx(6.0));
  CHECK(f.events[0].trigger_frame == 3);
}

TEST_CASE("online detector resets every channel after firing") {
  OnlineDetectorParams p;
  p.channels = {{0, 5.0}, {1, 5.0}};
  p.patience = 1;
  OnlineDetector det(std::move(p));

  // Channel 0 fires at frame 2; channel 1's run (sum 6, already armed) must
  // be discarded with it, so the later frames rebuild it from scratch.
  std::vector<std::vector<double>> rows{
      {6, 2}, {6, 2}, {-1, 2}, {0, 2}, {0, 2}, {0, 2}, {0, -1}};
  std::vector<DetectionEvent> events;
  for (const auto& row : rows) {
    if (auto e = det.push(row)) events.push_back(*e);
  }
  REQUIRE(events.size() == 2);
  CHECK(events[0].class_id == 0);
  CHECK(events[0].score == doctest::Approx(12.0));
  CHECK(events[0].trigger_frame == 2);
  CHECK(events[1].class_id == 1);
  // Frames 3..5 only: the pre-reset votes at frames 0..2 are gone.
  CHECK(events[1].start_frame == 3);
  CHECK(events[1].end_frame == 5);
  CHECK(events[1].score == doctest::Approx(6.0));
}

TEST_CASE("simultaneous firings pick the higher peak, ties the lower class") {
  OnlineDetectorParams p;
  p.channels = {{0, 3.0}, {1, 3.0}};
  OnlineDetector det(std::move(p));
  std::vector<DetectionEvent> events;
  for (const auto& row : std::vector<std::vector<double>>{{4, 5}, {-1, -1}}) {
    if (auto e = det.push(row)) events.push_back(*e);
  }
  REQUIRE(events.size() == 1);
  CHECK(events[0].class_id == 1);
  CHECK(events[0].score == doctest::Approx(5.0));

  OnlineDetectorParams q;
  q.channels = {{3, 3.0}, {7, 3.0}};
  OnlineDetector tie(std::move(q));
  events.clear();
  for (const auto& row : std::vector<std::vector<double>>{{4, 4}, {-1, -1}}) {
    if (auto e = tie.push(row)) events.push_back(*e);
  }
  REQUIRE(events.size() == 1);
  CHECK(events[0].class_id == 3);
}

TEST_CASE("online and offline agree on isolated single-run arrays") {
  // Arrays built as negative padding, one strictly positive run, negative
  // padding. With patience 1 the online event interval and peak sum must
  // match the offline maximum-subarray event exactly when the run's best
  // prefix ends at its last element (monotone prefix sums inside the run).
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> pad_len(1, 6), run_len(1, 10);
  std::uniform_real_distribution<double> pos(0.1, 2.0), neg(-3.0, -0.5);

  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> xs;
    for (int i = pad_len(rng); i-- > 0;) xs.push_back(neg(rng));
    const std::size_t run_start = xs.size();
    double run_sum = 0.0;
    for (int i = run_len(rng); i-- > 0;) {
      xs.push_back(pos(rng));
      run_sum += xs.back();
    }
    const std::size_t run_end = xs.size() - 1;
    for (int i = pad_len(rng); i-- > 0;) xs.push_back(neg(rng));

    const double threshold = run_sum * 0.5;

    ScoreArray s;
    s.scores = xs;
    const std::vector<DetectionEvent> off = detect_offline(s, threshold);
    REQUIRE(off.size() == 1);

    OnlineDetector det = single_channel(threshold);
    const Fired on = feed(det, xs);
    REQUIRE(on.events.size() == 1);

    CAPTURE(trial);
    CHECK(on.events[0].start_frame == static_cast<FrameIndex>(run_start));
    CHECK(on.events[0].end_frame == static_cast<FrameIndex>(run_end));
    CHECK(off[0].start_frame == on.events[0].start_frame);
    CHECK(off[0].end_frame == on.events[0].end_frame);
    CHECK(off[0].score == doctest::Approx(on.events[0].score).epsilon(1e-12));
  }
}

TEST_CASE("online splits repetitions that offline merges") {
  // Two bumps with a shallow negative gap: each bump clears the threshold,
  // the gap costs less than either bump, so one global maximum spans both.
  const std::vector<double> xs{-1, 3, 3, -0.5, -0.5, 3, 3, -1, -1};
  const double threshold = 5.0;

  ScoreArray s;
  s.scores = xs;
  const std::vector<DetectionEvent> off = detect_offline(s, threshold);
  REQUIRE(off.size() == 1);
  CHECK(off[0].start_frame == 1);
  CHECK(off[0].end_frame == 6);

  OnlineDetector det = single_channel(threshold);
  const Fired on = feed(det, xs);
  REQUIRE(on.events.size() == 2);
  CHECK(on.events[0].start_frame == 1);
  CHECK(on.events[0].end_frame == 2);
  CHECK(on.events[1].start_frame == 5);
  CHECK(on.events[1].end_frame == 6);
}

TEST_CASE("reset clears run state but keeps the stream position") {
  OnlineDetector det = single_channel(3.0);
  feed(det, {2, 2});  // sum 4, armed, no firing yet
  det.reset();
  // The frame counter survives: the same reset runs after every firing, and
  // rewinding it there would corrupt later events' frame numbers.
  CHECK(det.frames_pushed() == 2);
  // A fresh negative frame must not fire the pre-reset run.
  const Fired f = feed(det, {-1});
  CHECK(f.events.empty());
  // A rebuilt run gets stream-relative frame numbers.
  const Fired g = feed(det, {4, -1});
  REQUIRE(g.events.size() == 1);
  CHECK(g.events[0].start_frame == 3);
  CHECK(g.events[0].trigger_frame == 4);
}
