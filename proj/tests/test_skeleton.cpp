#include <cmath>
#include <set>

#include "bog/skeleton.hpp"
#include "doctest.h"

using namespace bog;

TEST_CASE("stock topology is well formed") {
  const SkeletonTopology topo = default_topology();
  CHECK(topo.joint_count() == 20);
  CHECK(topo.angle_count() == 35);
  CHECK(topo.joint_names[topo.reference_joint] == "hip_center");
  CHECK(validate_topology(topo).ok());

  // Names are unique and resolvable.
  std::set<std::string> names(topo.joint_names.begin(), topo.joint_names.end());
  CHECK(names.size() == topo.joint_names.size());
  for (int j = 0; j < topo.joint_count(); ++j) {
    CHECK(topo.joint_index(topo.joint_names[j]) == j);
  }
  CHECK(topo.joint_index("no_such_joint") == -1);

  // No triplet measures an angle at a ray of length zero by construction.
  for (const AngleTriplet& t : topo.angle_triplets) {
    CHECK(t.a != t.vertex);
    CHECK(t.b != t.vertex);
  }
}

TEST_CASE("topology validation flags out-of-range pieces") {
  SkeletonTopology topo;
  topo.joint_names = {"a", "b", "c"};
  topo.reference_joint = 0;
  topo.angle_triplets = {{0, 1, 2}};
  CHECK(validate_topology(topo).ok());

  topo.reference_joint = 3;
  CHECK(!validate_topology(topo).ok());
  topo.reference_joint = 0;

  topo.angle_triplets = {{0, 1, 7}};
  CHECK(!validate_topology(topo).ok());

  topo.angle_triplets = {{1, 1, 2}};  // endpoint equals the vertex
  CHECK(!validate_topology(topo).ok());

  SkeletonTopology empty;
  CHECK(!validate_topology(empty).ok());
}

namespace {

SkeletonSequence tiny_sequence(int frames, int joints) {
  SkeletonSequence seq;
  for (int t = 0; t < frames; ++t) {
    SkeletonFrame f;
    f.index = t;
    f.joints.resize(joints);
    for (int j = 0; j < joints; ++j) f.joints[j] = {0.1 * j, 0.2 * j, 1.0};
    seq.frames.push_back(f);
  }
  return seq;
}

SkeletonTopology tiny_topology(int joints) {
  SkeletonTopology topo;
  for (int j = 0; j < joints; ++j) topo.joint_names.push_back("j" + std::to_string(j));
  topo.reference_joint = 0;
  topo.angle_triplets = {{0, 1, 2}};
  return topo;
}

}  // namespace

TEST_CASE("sequence validation") {
  const SkeletonTopology topo = tiny_topology(4);
  SkeletonSequence seq = tiny_sequence(5, 4);
  CHECK(validate_sequence(seq, topo).ok());

  SUBCASE("gap in the frame numbering") {
    seq.frames[3].index = 7;
    const ValidationResult r = validate_sequence(seq, topo);
    CHECK(!r.ok());
    CHECK(r.violations[0].frame == 3);
  }
  SUBCASE("wrong joint count") {
    seq.frames[2].joints.pop_back();
    CHECK(!validate_sequence(seq, topo).ok());
  }
  SUBCASE("non-finite coordinate") {
    seq.frames[4].joints[1].y = std::nan("");
    CHECK(!validate_sequence(seq, topo).ok());
    seq.frames[4].joints[1].y = INFINITY;
    CHECK(!validate_sequence(seq, topo).ok());
  }
  SUBCASE("bad fps") {
    seq.fps = 0.0;
    CHECK(!validate_sequence(seq, topo).ok());
  }
  SUBCASE("first frame not zero") {
    for (SkeletonFrame& f : seq.frames) f.index += 1;
    CHECK(!validate_sequence(seq, topo).ok());
  }
}

TEST_CASE("annotation validity") {
  CHECK(annotation_valid({0, 5, 10, std::nullopt}));
  CHECK(annotation_valid({0, 5, 5, 5}));
  CHECK(!annotation_valid({0, 10, 5, std::nullopt}));  // reversed interval
  CHECK(!annotation_valid({0, 5, 10, 11}));            // action point outside
  CHECK(!annotation_valid({0, 5, 10, 4}));
  CHECK(!annotation_valid({-1, 5, 10, std::nullopt}));  // negative class
  CHECK(!annotation_valid({0, -2, 10, std::nullopt}));
}
