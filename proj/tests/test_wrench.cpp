#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "inhand/wrench.hpp"
#include "test_util.hpp"

using namespace inhand;
using Eigen::Matrix3d;
using Eigen::Vector3d;

namespace {
const double kPi = 3.14159265358979323846;

ObjectModel point_mass(double mass = 1.0) {
  ObjectModel obj;
  obj.mass = mass;
  obj.inertia = Matrix3d::Identity() * 1e-3;
  obj.primitives.push_back(Primitive::sphere({0, 0, 0}, 0.01));
  obj.contacts.push_back({"c0", {0, 0, 0}, {0, 0, 1}, {1, 0, 0}});
  return obj;
}

// Assemble the QP data exactly as the implementation defines the objective,
// for the projected-gradient oracle.
void build_problem(const std::vector<ContactForceEntry>& contacts, const WrenchTarget& target,
                   double w_t, double mu, int L, Eigen::MatrixXd& W, Eigen::VectorXd& y,
                   std::vector<testrig::PgContact>& pg) {
  int nv = 0;
  for (const auto& c : contacts) nv += c.sliding ? 1 : 3;
  W.setZero(6, nv);
  y.resize(6);
  y.head<3>() = target.f;
  y.tail<3>() = std::sqrt(w_t) * target.tau;
  pg.clear();
  int off = 0;
  for (const auto& c : contacts) {
    testrig::PgContact p;
    if (c.sliding) {
      p.sliding = true;
      const Vector3d edge = c.n + mu * c.slide_dir;
      W.block<3, 1>(0, off) = edge;
      W.block<3, 1>(3, off) = std::sqrt(w_t) * c.p.cross(edge);
      off += 1;
    } else {
      W.block<3, 3>(0, off).setIdentity();
      W.block<3, 3>(3, off) = std::sqrt(w_t) * skew(c.p);
      p.faces = friction_pyramid(c.n, c.t1, mu, L).faces;
      off += 3;
    }
    pg.push_back(std::move(p));
  }
}

}  // namespace

TEST_CASE("required_wrench") {
  const ObjectModel obj = point_mass(1.0);

  SUBCASE("static hover against gravity") {
    const WrenchTarget t = required_wrench(obj, Matrix3d::Identity(), Vector3d::Zero(),
                                           Vector3d::Zero(), Vector3d::Zero(),
                                           Vector3d(0, 0, -9.81), Vector3d::Zero());
    CHECK(t.f.isApprox(Vector3d(0, 0, 9.81), 1e-12));
    CHECK(t.tau.norm() <= 1e-12);
  }

  SUBCASE("gyroscopic torque") {
    ObjectModel spinning = obj;
    spinning.inertia = Vector3d(1, 2, 3).asDiagonal();
    const WrenchTarget t = required_wrench(spinning, Matrix3d::Identity(),
                                           Vector3d(1, 1, 0), Vector3d::Zero(),
                                           Vector3d::Zero(), Vector3d::Zero(),
                                           Vector3d::Zero());
    CHECK(t.tau.isApprox(Vector3d(0, 0, 1), 1e-12));
    CHECK(t.f.norm() <= 1e-12);
  }

  SUBCASE("inertia rotates with the body") {
    ObjectModel o = obj;
    o.inertia = Vector3d(1.0, 2.0, 3.0).asDiagonal();
    const Matrix3d R = Eigen::AngleAxisd(kPi / 2, Vector3d::UnitZ()).toRotationMatrix();
    // body x maps to world y: a world-frame dw about y sees the body-x inertia
    const WrenchTarget t = required_wrench(o, R, Vector3d::Zero(), Vector3d::Zero(),
                                           Vector3d(0, 1, 0), Vector3d::Zero(),
                                           Vector3d::Zero());
    CHECK(t.tau.isApprox(Vector3d(0, 1, 0), 1e-9));
  }
}

TEST_CASE("friction_pyramid formula and validation") {
  const Vector3d n(0, 0, 1), t1(1, 0, 0);
  const FrictionPyramid pyr = friction_pyramid(n, t1, 1.0, 12);
  REQUIRE(pyr.faces.size() == 12);
  // l = L: theta = 2 pi -> c = t1 - mu n = (1, 0, -1)
  CHECK(pyr.faces.back().isApprox(Vector3d(1, 0, -1), 1e-12));

  // pure normal force is strictly inside every face
  for (const auto& c : pyr.faces) CHECK(c.dot(n) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(inside_pyramid(pyr, Vector3d(0, 0, 1)));

  // tangential force above the cone fails at least one face (brute force)
  const Vector3d f_bad = (1.0 + 1e-6) * t1 + n;
  CHECK(!inside_pyramid(pyr, f_bad, 1e-9));

  CHECK_THROWS_AS(friction_pyramid(n, Vector3d(0, 0.5, 0.5).normalized(), 1.0, 12),
                  std::invalid_argument);
  CHECK_THROWS_AS(friction_pyramid(n, t1, -0.5, 12), std::invalid_argument);
  CHECK_THROWS_AS(friction_pyramid(n, t1, 1.0, 2), std::invalid_argument);
}

TEST_CASE("optimize_contact_forces") {
  SUBCASE("zero target gives zero forces") {
    std::vector<ContactForceEntry> cs(2);
    cs[0].p = Vector3d(0.05, 0, 0);
    cs[0].n = Vector3d(-1, 0, 0);
    cs[0].t1 = Vector3d(0, 0, 1);
    cs[1].p = Vector3d(-0.05, 0, 0);
    cs[1].n = Vector3d(1, 0, 0);
    cs[1].t1 = Vector3d(0, 0, 1);
    const ContactForceResult r =
        optimize_contact_forces(cs, WrenchTarget{}, 1.0, 1.0, 12);
    CHECK(r.metrics.e_star <= 1e-12);
    CHECK(r.metrics.f_star <= 1e-9);
  }

  SUBCASE("antipodal squeeze holds a cube against gravity") {
    std::vector<ContactForceEntry> cs(2);
    cs[0].p = Vector3d(0.05, 0, 0);
    cs[0].n = Vector3d(-1, 0, 0);
    cs[0].t1 = Vector3d(0, 0, 1);
    cs[1].p = Vector3d(-0.05, 0, 0);
    cs[1].n = Vector3d(1, 0, 0);
    cs[1].t1 = Vector3d(0, 0, 1);
    WrenchTarget target;
    target.f = Vector3d(0, 0, 9.81);
    const ContactForceResult r = optimize_contact_forces(cs, target, 1.0, 1.0, 12);
    CHECK(r.metrics.e_star <= 1e-8);
    CHECK(r.forces[0].z() + r.forces[1].z() == doctest::Approx(9.81).epsilon(1e-6));
    // symmetric: squeezing components cancel
    CHECK(r.forces[0].x() == doctest::Approx(-r.forces[1].x()).epsilon(1e-6));
    CHECK(r.forces[0].x() < 0.0);  // pushes into the +x face
    // every force inside its pyramid
    const FrictionPyramid p0 = friction_pyramid(cs[0].n, cs[0].t1, 1.0, 12);
    CHECK(inside_pyramid(p0, r.forces[0], 1e-9));
  }

  SUBCASE("single contact cannot produce torque about itself") {
    std::vector<ContactForceEntry> cs(1);
    cs[0].p = Vector3d::Zero();  // contact at the origin
    cs[0].n = Vector3d(0, 0, 1);
    cs[0].t1 = Vector3d(1, 0, 0);
    WrenchTarget target;
    target.tau = Vector3d(0, 0, 0.5);
    const ContactForceResult r = optimize_contact_forces(cs, target, 1.0, 1.0, 12);
    CHECK(r.metrics.e_star >= 0.24);  // at least w_t ||tau||^2 minus slack
    CHECK(r.metrics.e_star == doctest::Approx(0.25).epsilon(1e-6));
  }

  SUBCASE("sliding contact pinned to the cone edge") {
    std::vector<ContactForceEntry> cs(1);
    cs[0].p = Vector3d::Zero();
    cs[0].n = Vector3d(0, 0, 1);
    cs[0].t1 = Vector3d(1, 0, 0);
    cs[0].sliding = true;
    cs[0].slide_dir = Vector3d(1, 0, 0);
    const double mu = 0.5;
    WrenchTarget target;
    target.f = Vector3d(0.5, 0, 1.0);  // exactly alpha (n + mu d) with alpha = 1
    const ContactForceResult r = optimize_contact_forces(cs, target, 1.0, mu, 12);
    CHECK(r.metrics.e_star <= 1e-10);
    CHECK(r.forces[0].isApprox(Vector3d(0.5, 0, 1.0), 1e-5));
    // the returned force is on the friction-cone edge: |f_t| = mu f_n
    const double fn = r.forces[0].z();
    const double ft = r.forces[0].head<2>().norm();
    CHECK(ft == doctest::Approx(mu * fn).epsilon(1e-9));
  }

  SUBCASE("empty grasp throws") {
    CHECK_THROWS_AS(optimize_contact_forces({}, WrenchTarget{}, 1.0, 1.0, 12),
                    std::invalid_argument);
  }
}

TEST_CASE("grasp_metrics on the cube") {
  const ObjectModel obj = testrig::cube_object(0.05, 1.0);
  const HandModel hand = testrig::star_hand();
  Grasp g;
  g.contacts.push_back(make_contact(hand, obj, hand.global_link(0, 1), 0));  // px face
  g.contacts.push_back(make_contact(hand, obj, hand.global_link(1, 1), 1));  // nx face
  const Pose pose = testrig::pose_xyz(0, 0, 1.0);
  WrenchParams params;

  const ContactForceResult r =
      grasp_metrics(obj, g, pose, Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero(),
                    Vector3d::Zero(), Vector3d::Zero(), params);
  // f_hat_total = ||(0,0,9.81)||^2 with w_t = 1 and zero target torque
  CHECK(r.metrics.f_hat_total == doctest::Approx(96.2361).epsilon(1e-12));
  CHECK(r.metrics.e_star <= 1e-8);

  // f_star equals the recomputed sum of squared forces
  double fsq = 0.0;
  for (const auto& f : r.forces) fsq += f.squaredNorm();
  CHECK(r.metrics.f_star == doctest::Approx(fsq).epsilon(1e-15));
}

TEST_CASE("adding a sticking contact never increases e*") {
  const ObjectModel obj = testrig::cube_object(0.05, 1.0);
  const HandModel hand = testrig::star_hand();
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  WrenchParams params;
  for (int trial = 0; trial < 20; ++trial) {
    Pose pose = testrig::pose_xyz(0, 0, 1.0);
    pose.R = testrig::random_rotation(rng);
    const Vector3d w(u(rng), u(rng), u(rng));
    const Vector3d dv(u(rng), u(rng), u(rng));
    const Vector3d dw(u(rng), u(rng), u(rng));
    Grasp small;
    small.contacts.push_back(make_contact(hand, obj, hand.global_link(0, 1), 0));
    small.contacts.push_back(make_contact(hand, obj, hand.global_link(1, 1), 1));
    Grasp big = small;
    big.contacts.push_back(make_contact(hand, obj, hand.global_link(2, 1), 2));
    const double e_small = grasp_metrics(obj, small, pose, w, dv, dw, Vector3d::Zero(),
                                         Vector3d::Zero(), params)
                               .metrics.e_star;
    const double e_big = grasp_metrics(obj, big, pose, w, dv, dw, Vector3d::Zero(),
                                       Vector3d::Zero(), params)
                             .metrics.e_star;
    CHECK(e_big <= e_small + 1e-9);
  }
}

TEST_CASE("QP solution matches the projected-gradient oracle on random instances") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double mu = 1.0;
  const int L = 12;
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int K = 1 + static_cast<int>(rng() % 4);
    std::vector<ContactForceEntry> cs(K);
    for (auto& c : cs) {
      c.p = Vector3d(u(rng), u(rng), u(rng)) * 0.06;
      Vector3d n(u(rng), u(rng), u(rng));
      while (n.norm() < 1e-3) n = Vector3d(u(rng), u(rng), u(rng));
      c.n = n.normalized();
      Vector3d t(u(rng), u(rng), u(rng));
      t -= t.dot(c.n) * c.n;
      while (t.norm() < 1e-3) {
        t = Vector3d(u(rng), u(rng), u(rng));
        t -= t.dot(c.n) * c.n;
      }
      c.t1 = t.normalized();
      if (trial % 3 == 0 && (&c - cs.data()) == 0) {
        c.sliding = true;
        c.slide_dir = c.t1;
      }
    }
    WrenchTarget target;
    target.f = Vector3d(u(rng), u(rng), u(rng)) * 10.0;
    target.tau = Vector3d(u(rng), u(rng), u(rng)) * 0.5;
    const double w_t = 1.0;

    const ContactForceResult r = optimize_contact_forces(cs, target, w_t, mu, L);

    Eigen::MatrixXd W;
    Eigen::VectorXd y;
    std::vector<testrig::PgContact> pg;
    build_problem(cs, target, w_t, mu, L, W, y, pg);
    const double oracle = testrig::pg_oracle(W, y, pg);
    CHECK(r.metrics.e_star <= oracle + 1e-6 * std::max(1.0, oracle));
    CHECK(std::abs(r.metrics.e_star - oracle) <= 1e-6 * std::max(1.0, oracle));
    ++checked;
  }
  CHECK(checked == 60);
}
