#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "inhand/collision.hpp"
#include "test_util.hpp"

using namespace inhand;
using Eigen::Vector3d;

TEST_CASE("point signed distances") {
  const auto sph = Primitive::sphere({0, 0, 0}, 1.0);
  Vector3d n;
  CHECK(signed_distance(sph, {2, 0, 0}, &n) == doctest::Approx(1.0));
  CHECK(n.isApprox(Vector3d(1, 0, 0), 1e-12));
  CHECK(signed_distance(sph, {0.5, 0, 0}, &n) == doctest::Approx(-0.5));

  const auto cap = Primitive::capsule({0, 0, 0}, {1, 0, 0}, 0.1);
  CHECK(signed_distance(cap, {0.5, 0.3, 0}, &n) == doctest::Approx(0.2));
  CHECK(n.isApprox(Vector3d(0, 1, 0), 1e-12));
  CHECK(signed_distance(cap, {-0.2, 0, 0}, nullptr) == doctest::Approx(0.1));

  const auto box = Primitive::box(Pose{}, Vector3d(1, 2, 3));
  CHECK(signed_distance(box, {2, 0, 0}, &n) == doctest::Approx(1.0));
  CHECK(n.isApprox(Vector3d(1, 0, 0), 1e-12));
  // inside: closest face is x
  CHECK(signed_distance(box, {0.5, 0, 0}, &n) == doctest::Approx(-0.5));
  CHECK(n.isApprox(Vector3d(1, 0, 0), 1e-12));
  CHECK(signed_distance(box, {-0.9, 0.0, 0.0}, &n) == doctest::Approx(-0.1));
  CHECK(n.isApprox(Vector3d(-1, 0, 0), 1e-12));
  // outside a corner
  CHECK(signed_distance(box, {2, 3, 4}, nullptr) == doctest::Approx(std::sqrt(3.0)));

  const auto floor = Primitive::half_space(Vector3d(0, 0, 1), 0.0);
  CHECK(signed_distance(floor, {0, 0, 0.7}, &n) == doctest::Approx(0.7));
  CHECK(signed_distance(floor, {0, 0, -0.2}, nullptr) == doctest::Approx(-0.2));
  CHECK(n.isApprox(Vector3d(0, 0, 1), 1e-12));
}

TEST_CASE("transformed primitives") {
  Pose frame;
  frame.p = Vector3d(1, 2, 3);
  frame.R = Eigen::AngleAxisd(0.5, Vector3d::UnitZ()).toRotationMatrix();
  const auto sph = transformed(Primitive::sphere({1, 0, 0}, 0.5), frame);
  CHECK(sph.c.isApprox(frame * Vector3d(1, 0, 0), 1e-12));

  const auto hs = transformed(Primitive::half_space(Vector3d(0, 0, 1), 0.0),
                              testrig::pose_xyz(0, 0, 2));
  CHECK(signed_distance(hs, {5, 5, 2.5}, nullptr) == doctest::Approx(0.5));
}

TEST_CASE("segment-segment distance") {
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}) ==
        doctest::Approx(1.0));
  // crossing skew segments
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0.5, -1, 0.3}, {0.5, 1, 0.3}) ==
        doctest::Approx(0.3));
  // endpoints closest
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {3, 0, 0}, {4, 0, 0}) ==
        doctest::Approx(2.0));
}

TEST_CASE("primitive pair distances") {
  const auto s1 = Primitive::sphere({0, 0, 0}, 0.5);
  const auto s2 = Primitive::sphere({2, 0, 0}, 0.5);
  CHECK(distance(s1, s2) == doctest::Approx(1.0));
  CHECK(!overlap(s1, s2));
  CHECK(overlap(s1, Primitive::sphere({0.8, 0, 0}, 0.5)));

  const auto box = Primitive::box(Pose{}, Vector3d(1, 1, 1));
  CHECK(distance(Primitive::sphere({3, 0, 0}, 0.5), box) == doctest::Approx(1.5));
  CHECK(distance(Primitive::capsule({0, 0, 2}, {0, 0, 3}, 0.25), box) == doctest::Approx(0.75));

  // box-box separated along x by 0.5
  const auto boxB = Primitive::box(testrig::pose_xyz(2.5, 0, 0), Vector3d(1, 1, 1));
  CHECK(distance(box, boxB) == doctest::Approx(0.5));
  CHECK(!overlap(box, boxB));
  const auto boxC = Primitive::box(testrig::pose_xyz(1.5, 0, 0), Vector3d(1, 1, 1));
  CHECK(overlap(box, boxC));

  // rotated box vs box (45 degrees: corner reaches sqrt(2))
  Pose rot45 = testrig::pose_xyz(3.0, 0, 0);
  rot45.R = Eigen::AngleAxisd(M_PI / 4, Vector3d::UnitZ()).toRotationMatrix();
  const auto boxD = Primitive::box(rot45, Vector3d(1, 1, 1));
  CHECK(distance(box, boxD) == doctest::Approx(3.0 - 1.0 - std::sqrt(2.0)).epsilon(1e-9));

  const auto floor = Primitive::half_space(Vector3d(0, 0, 1), 0.0);
  CHECK(distance(floor, Primitive::sphere({0, 0, 1}, 0.25)) == doctest::Approx(0.75));
  CHECK(distance(floor, box) == doctest::Approx(-1.0));
  CHECK(distance(floor, Primitive::capsule({0, 0, 0.5}, {0, 0, 1.5}, 0.1)) ==
        doctest::Approx(0.4));
}

TEST_CASE("any_overlap over primitive sets") {
  std::vector<Primitive> a{Primitive::sphere({0, 0, 0}, 0.5)};
  std::vector<Primitive> b{Primitive::sphere({2, 0, 0}, 0.5),
                           Primitive::sphere({0.75, 0, 0}, 0.5)};
  CHECK(any_overlap(a, b));
  b.pop_back();
  CHECK(!any_overlap(a, b));
  CHECK(any_overlap(a, b, 1.1));  // margin reaches the far sphere
}
