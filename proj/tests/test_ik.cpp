#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "inhand/ik.hpp"
#include "test_util.hpp"

using namespace inhand;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

// KKT residual of min sum ||J dq - dp||^2 under box bounds at the solution.
double box_kkt_residual(const std::vector<MatrixXd>& jacs,
                        const std::vector<Vector3d>& targets, const VectorXd& dq,
                        const VectorXd& lo, const VectorXd& hi) {
  VectorXd grad = VectorXd::Zero(dq.size());
  for (size_t k = 0; k < jacs.size(); ++k) {
    grad += 2.0 * jacs[k].transpose() * (jacs[k] * dq - targets[k]);
  }
  double r = 0.0;
  for (int i = 0; i < dq.size(); ++i) {
    const double margin = 1e-10 * std::max(1.0, hi(i) - lo(i));
    if (dq(i) <= lo(i) + margin) {
      r = std::max(r, std::max(0.0, -grad(i)));
    } else if (dq(i) >= hi(i) - margin) {
      r = std::max(r, std::max(0.0, grad(i)));
    } else {
      r = std::max(r, std::abs(grad(i)));
    }
  }
  return r;
}

Grasp tip_grasp(const HandModel& hand, const ObjectModel& obj, int link, int pt) {
  Grasp g;
  g.contacts.push_back(make_contact(hand, obj, link, pt));
  return g;
}

}  // namespace

TEST_CASE("ik_step basics") {
  const HandModel hand = testrig::planar_hand(2);
  VectorXd q = VectorXd::Zero(2);
  const Vector3d c_tip(1.0, 0.0, 0.0);
  const MatrixXd J = contact_jacobian(hand, q, 1, c_tip);

  SUBCASE("zero targets give zero step") {
    const VectorXd dq = ik_step(q, {Vector3d::Zero()}, {J}, 1.0, hand.q_min(), hand.q_max());
    CHECK(dq.norm() <= 1e-12);
  }

  SUBCASE("nonsingular square system matches the pseudo-inverse oracle") {
    // stack two contacts so the 6x2 system has a consistent least-squares answer
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    VectorXd qr(2);
    qr << 0.4, -0.7;
    const MatrixXd J1 = contact_jacobian(hand, qr, 0, c_tip);
    const MatrixXd J2 = contact_jacobian(hand, qr, 1, c_tip);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector3d t1(g(rng) * 1e-2, g(rng) * 1e-2, 0.0);
      const Vector3d t2(g(rng) * 1e-2, g(rng) * 1e-2, 0.0);
      const VectorXd dq =
          ik_step(qr, {t1, t2}, {J1, J2}, 1.0, hand.q_min(), hand.q_max());
      MatrixXd W(6, 2);
      W.topRows(3) = J1;
      W.bottomRows(3) = J2;
      VectorXd y(6);
      y << t1, t2;
      const VectorXd oracle = W.completeOrthogonalDecomposition().solve(y);
      CHECK((dq - oracle).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
  }

  SUBCASE("bound clamp at q_max") {
    VectorXd at_max = hand.q_max();
    const MatrixXd Jm = contact_jacobian(hand, at_max, 1, c_tip);
    // ask for motion along +J e0 so the unconstrained step would need dq > 0
    const Vector3d target = Jm.col(0) * 0.1 + Jm.col(1) * 0.1;
    const VectorXd dq =
        ik_step(at_max, {target}, {Jm}, 1.0, hand.q_min(), hand.q_max());
    CHECK(dq(0) <= 1e-12);
    CHECK(dq(1) <= 1e-12);
  }

  SUBCASE("gain widens or narrows the box") {
    VectorXd at_max = hand.q_max();
    CHECK_THROWS_AS(
        ik_step(at_max, {Vector3d::Zero()}, {J}, 0.0, hand.q_min(), hand.q_max()),
        std::invalid_argument);
  }
}

TEST_CASE("ik_step satisfies KKT on random problems") {
  const HandModel hand = testrig::star_hand();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd q(hand.dof());
    for (int i = 0; i < q.size(); ++i) q(i) = u(rng);
    std::vector<MatrixXd> jacs;
    std::vector<Vector3d> targets;
    for (int f = 0; f < 2; ++f) {
      const int link = hand.global_link(f, 1);
      jacs.push_back(contact_jacobian(hand, q, link, hand.link(link).contacts[0].point));
      targets.emplace_back(u(rng) * 0.05, u(rng) * 0.05, u(rng) * 0.05);
    }
    const VectorXd lo = (hand.q_min() - q);
    const VectorXd hi = (hand.q_max() - q);
    const VectorXd dq = ik_step(q, targets, jacs, 1.0, hand.q_min(), hand.q_max());
    CHECK(box_kkt_residual(jacs, targets, dq, lo.cwiseMin(0.0), hi.cwiseMax(0.0)) <= 1e-8);
  }
}

TEST_CASE("solve_ik on the planar rig") {
  const HandModel hand = testrig::planar_hand(2);
  ObjectModel obj = testrig::cube_object(0.01, 0.1);
  const Environment env;  // no statics

  SUBCASE("reachable target converges below threshold") {
    // place the object so its px contact sits at (1.2, 0.8, 0)
    Pose pose;
    pose.p = Vector3d(1.19, 0.8, 0.0);
    const Grasp g = tip_grasp(hand, obj, 1, 0);
    VectorXd q0(2);
    q0 << 0.3, 0.3;
    const IkResult res = solve_ik(hand, q0, pose, g, env);
    CHECK(res.termination == IkTermination::Threshold);
    CHECK(res.d_star < 1e-8);
    // FK oracle: tip must coincide with the object-frame contact point
    const auto poses = forward_kinematics(hand, res.q_star);
    const Vector3d tip = contact_point_world(hand, poses, 1, Vector3d(1.0, 0.0, 0.0));
    CHECK((tip - pose * obj.contacts[0].point).norm() <= 1e-4);
  }

  SUBCASE("already-converged start returns immediately") {
    Pose pose;
    pose.p = Vector3d(1.19, 0.8, 0.0);
    const Grasp g = tip_grasp(hand, obj, 1, 0);
    VectorXd q0(2);
    q0 << 0.3, 0.3;
    const IkResult first = solve_ik(hand, q0, pose, g, env);
    const IkResult again = solve_ik(hand, first.q_star, pose, g, env);
    CHECK(again.termination == IkTermination::Threshold);
    CHECK(again.iterations == 0);
  }

  SUBCASE("unreachable target stops on error increase or the cap") {
    Pose pose;
    pose.p = Vector3d(5.0, 0.0, 0.0);  // beyond total reach 2 + contact offset
    const Grasp g = tip_grasp(hand, obj, 1, 0);
    VectorXd q0(2);
    q0 << 0.1, 0.1;
    const IkResult res = solve_ik(hand, q0, pose, g, env);
    CHECK(res.d_star > 1e-8);
    CHECK((res.termination == IkTermination::ErrorIncrease ||
           res.termination == IkTermination::IterationCap));
  }

  SUBCASE("environment contact stops the iteration") {
    const Environment floor = Environment::floor_at(-0.02);
    Pose pose;
    pose.p = Vector3d(1.2, -1.2, 0.0);  // pulls the arm through the floor
    const Grasp g = tip_grasp(hand, obj, 1, 0);
    VectorXd q0(2);
    q0 << -0.05, -0.02;
    const IkResult res = solve_ik(hand, q0, pose, g, floor);
    CHECK(res.termination == IkTermination::EnvironmentContact);
  }

  SUBCASE("empty grasp throws") {
    CHECK_THROWS_AS(solve_ik(hand, VectorXd::Zero(2), Pose{}, Grasp{}, env),
                    std::invalid_argument);
  }
}

TEST_CASE("solve_ik respects joint limits and monotone acceptance") {
  const HandModel hand = testrig::star_hand();
  const ObjectModel obj = testrig::cube_object();
  const Environment env;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int trial = 0; trial < 25; ++trial) {
    Pose pose = testrig::pose_xyz(u(rng) * 0.2, u(rng) * 0.2, 1.0 + u(rng) * 0.2);
    Grasp g;
    g.contacts.push_back(make_contact(hand, obj, hand.global_link(0, 1), 0));
    g.contacts.push_back(make_contact(hand, obj, hand.global_link(1, 1), 1));
    VectorXd q0(hand.dof());
    for (int i = 0; i < q0.size(); ++i) q0(i) = u(rng);
    const IkResult res = solve_ik(hand, q0, pose, g, env);
    CHECK(((res.q_star - hand.q_min()).minCoeff() >= -1e-9));
    CHECK(((hand.q_max() - res.q_star).minCoeff() >= -1e-9));
    // d_star equals the recomputed total error at q_star
    const auto poses = forward_kinematics(hand, res.q_star);
    const auto errs = contact_residuals(hand, poses, pose, g);
    double d = 0.0;
    for (const auto& e : errs) d += e.squaredNorm();
    CHECK(res.d_star == doctest::Approx(d).epsilon(1e-12));
    CHECK(max_ik_error(res) <= res.d_star + 1e-15);
  }
}

TEST_CASE("max_ik_error") {
  IkResult r;
  r.contact_errors = {Vector3d(0.01, 0.0, 0.0)};
  r.d_star = 1e-4;
  CHECK(max_ik_error(r) == doctest::Approx(1e-4));
  r.contact_errors.push_back(Vector3d::Zero());
  CHECK(max_ik_error(r) == doctest::Approx(1e-4));

  IkResult two;
  two.contact_errors = {Vector3d::Zero(), Vector3d(0.0, 0.01, 0.0)};
  CHECK(max_ik_error(two) == doctest::Approx(1e-4));
}
