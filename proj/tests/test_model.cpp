#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "inhand/model.hpp"
#include "test_util.hpp"

using namespace inhand;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("planar forward kinematics") {
  const HandModel hand = testrig::planar_hand(2);
  const int tip = 1;
  const Vector3d c_tip(1.0, 0.0, 0.0);

  auto tip_at = [&](double q0, double q1) {
    VectorXd q(2);
    q << q0, q1;
    const auto poses = forward_kinematics(hand, q);
    return contact_point_world(hand, poses, tip, c_tip);
  };

  CHECK(tip_at(0, 0).isApprox(Vector3d(2, 0, 0), 1e-12));
  CHECK(tip_at(kPi / 2, 0).isApprox(Vector3d(0, 2, 0), 1e-12));
  CHECK(tip_at(kPi / 2, -kPi / 2).isApprox(Vector3d(1, 1, 0), 1e-12));

  VectorXd bad(3);
  bad.setZero();
  CHECK_THROWS_AS(forward_kinematics(hand, bad), std::invalid_argument);
}

TEST_CASE("contact point equals link pose applied to the link-frame point") {
  const HandModel hand = testrig::star_hand();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd q(hand.dof());
    for (int i = 0; i < q.size(); ++i) q(i) = u(rng);
    const auto poses = forward_kinematics(hand, q);
    for (int l = 0; l < hand.num_links(); ++l) {
      for (const auto& cp : hand.link(l).contacts) {
        const Vector3d expect = poses[l].p + poses[l].R * cp.point;
        CHECK(contact_point_world(hand, poses, l, cp.point).isApprox(expect, 1e-14));
      }
    }
  }
}

TEST_CASE("contact jacobian lever arm") {
  const HandModel hand = testrig::planar_hand(1, 1.0);
  VectorXd q(1);
  q << 0.3;
  const Eigen::MatrixXd J = contact_jacobian(hand, q, 0, Vector3d(1.0, 0.0, 0.0));
  CHECK(J.rows() == 3);
  CHECK(J.cols() == 1);
  CHECK(J.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("planar two-link jacobian column norms at zero") {
  const HandModel hand = testrig::planar_hand(2, 1.0);
  VectorXd q = VectorXd::Zero(2);
  const Eigen::MatrixXd J = contact_jacobian(hand, q, 1, Vector3d(1.0, 0.0, 0.0));
  CHECK(J.col(0).norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(J.col(1).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("jacobian matches finite differences on random configurations") {
  const HandModel hand = testrig::star_hand();
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd q(hand.dof());
    for (int i = 0; i < q.size(); ++i) q(i) = u(rng);
    const int link = static_cast<int>(rng() % hand.num_links());
    const Vector3d c_J = hand.link(link).contacts.front().point;
    const Eigen::MatrixXd J = contact_jacobian(hand, q, link, c_J);
    const Eigen::MatrixXd Jfd = testrig::fd_jacobian(hand, q, link, c_J);
    CHECK((J - Jfd).norm() <= 1e-6 * std::max(1.0, J.norm()));

    // directional check at the spec's step size
    VectorXd dq(hand.dof());
    for (int i = 0; i < dq.size(); ++i) dq(i) = u(rng);
    dq *= 1e-5 / dq.norm();
    const auto p0 = forward_kinematics(hand, q);
    const auto p1 = forward_kinematics(hand, q + dq);
    const Vector3d moved = (p1[link] * c_J) - (p0[link] * c_J);
    CHECK((J * dq - moved).norm() <= 1e-6);
  }
}

TEST_CASE("grasp candidate enumeration") {
  const ObjectModel obj = testrig::cube_object();

  SUBCASE("two links, one point each") {
    const HandModel hand = testrig::star_hand();
    PairingMap pairing;
    pairing[hand.global_link(0, 1)] = {0};  // distal of finger 0 -> px
    pairing[hand.global_link(1, 1)] = {1};  // distal of finger 1 -> nx
    const auto grasps = enumerate_grasp_candidates(hand, obj, pairing);
    REQUIRE(grasps.size() == 1);
    CHECK(grasps[0].size() == 2);
  }

  SUBCASE("empty pairing throws") {
    const HandModel hand = testrig::star_hand();
    CHECK_THROWS_AS(enumerate_grasp_candidates(hand, obj, PairingMap{}),
                    std::invalid_argument);
  }

  SUBCASE("three one-link fingers with two points each: counting oracle") {
    // one candidate link per finger so the count is the free product
    const HandModel hand = testrig::star_hand();
    PairingMap pairing;
    pairing[hand.global_link(0, 1)] = {0, 3};
    pairing[hand.global_link(1, 1)] = {1, 3};
    pairing[hand.global_link(2, 1)] = {2, 3};
    const auto grasps = enumerate_grasp_candidates(hand, obj, pairing);

    // oracle: enumerate all per-finger choices, count those with >= 2 contacts
    int expected = 0;
    for (int a = 0; a <= 2; ++a) {
      for (int b = 0; b <= 2; ++b) {
        for (int c = 0; c <= 2; ++c) {
          const int contacts = (a > 0) + (b > 0) + (c > 0);
          if (contacts >= 2) ++expected;
        }
      }
    }
    CHECK(expected == 20);
    CHECK(static_cast<int>(grasps.size()) == expected);

    // deterministic ordering: a repeat call gives the identical sequence
    const auto again = enumerate_grasp_candidates(hand, obj, pairing);
    REQUIRE(again.size() == grasps.size());
    for (size_t i = 0; i < grasps.size(); ++i) CHECK(again[i] == grasps[i]);

    // no duplicates
    std::set<std::vector<std::pair<int, int>>> keys;
    for (const auto& g : grasps) keys.insert(g.key());
    CHECK(keys.size() == grasps.size());
  }

  SUBCASE("one contact per finger even with two candidate links") {
    const HandModel hand = testrig::star_hand();
    PairingMap pairing;
    pairing[hand.global_link(0, 0)] = {0};  // proximal and distal of the SAME finger
    pairing[hand.global_link(0, 1)] = {1};
    pairing[hand.global_link(1, 1)] = {2};
    const auto grasps = enumerate_grasp_candidates(hand, obj, pairing);
    for (const auto& g : grasps) {
      std::set<int> fingers;
      for (const auto& c : g.contacts) fingers.insert(hand.finger_of_link(c.link));
      CHECK(fingers.size() == g.contacts.size());
    }
    // options: f0 in {none, prox:0, dist:1}, f1 in {none, dist:2} -> pairs = 2
    CHECK(grasps.size() == 2);
  }

  SUBCASE("filter drops candidates") {
    const HandModel hand = testrig::star_hand();
    PairingMap pairing;
    pairing[hand.global_link(0, 1)] = {0};
    pairing[hand.global_link(1, 1)] = {1};
    const auto none = enumerate_grasp_candidates(hand, obj, pairing,
                                                 [](const Grasp&) { return false; });
    CHECK(none.empty());
  }
}

TEST_CASE("model validation") {
  HandModel hand = testrig::planar_hand(2);
  hand.fingers[0].joints[0].q_min = 2.0;
  hand.fingers[0].joints[0].q_max = -2.0;
  CHECK_THROWS_AS(hand.validate(), std::invalid_argument);

  ObjectModel obj = testrig::cube_object();
  obj.mass = -1.0;
  CHECK_THROWS_AS(obj.validate(), std::invalid_argument);

  ObjectModel obj2 = testrig::cube_object();
  obj2.contacts[0].tangent = obj2.contacts[0].normal;
  CHECK_THROWS_AS(obj2.validate(), std::invalid_argument);
}
