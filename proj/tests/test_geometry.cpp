#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "inhand/geometry.hpp"
#include "test_util.hpp"

using namespace inhand;

namespace {
const double kPi = 3.14159265358979323846;
Eigen::Matrix3d rot(const Eigen::Vector3d& axis, double ang) {
  return Eigen::AngleAxisd(ang, axis.normalized()).toRotationMatrix();
}
}  // namespace

TEST_CASE("rotation_error basic cases") {
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(rotation_error<double>(I, I).norm() == doctest::Approx(0.0).epsilon(1e-12));

  const Eigen::Vector3d ez = rotation_error<double>(I, rot(Eigen::Vector3d::UnitZ(), kPi / 2));
  CHECK(ez.isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));

  const Eigen::Vector3d ex = rotation_error<double>(I, rot(Eigen::Vector3d::UnitX(), kPi / 6));
  CHECK(ex.isApprox(Eigen::Vector3d(0.5, 0, 0), 1e-12));
}

TEST_CASE("rotation_error matches an independent axis-angle decomposition") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d R1 = testrig::random_rotation(rng);
    const Eigen::Matrix3d R2 = testrig::random_rotation(rng);
    Eigen::Vector3d axis;
    double angle;
    testrig::axis_angle_oracle(R2 * R1.transpose(), axis, angle);
    const Eigen::Vector3d err = rotation_error<double>(R1, R2);
    CHECK(err.norm() == doctest::Approx(std::abs(std::sin(angle))).epsilon(1e-9));
    if (std::sin(angle) > 1e-6) {
      CHECK(err.isApprox(axis * std::sin(angle), 1e-7));
    }
  }
}

TEST_CASE("rotation_error is zero for equal rotations") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix3d R = testrig::random_rotation(rng);
    CHECK(rotation_error<double>(R, R).norm() <= 1e-12);
  }
}

TEST_CASE("axis_angle at pi picks the deterministic axis sign") {
  Eigen::Vector3d axis;
  double angle;
  axis_angle<double>(rot(Eigen::Vector3d::UnitZ(), kPi), axis, angle);
  CHECK(angle == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(axis.isApprox(Eigen::Vector3d(0, 0, 1), 1e-9));

  // largest-magnitude component forced positive
  axis_angle<double>(rot(Eigen::Vector3d(-1.0, -1.0, 0.0).normalized(), kPi), axis, angle);
  CHECK(angle == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(axis(0) > 0.0);
  CHECK(axis.isApprox(Eigen::Vector3d(1.0, 1.0, 0.0).normalized(), 1e-9));

  // the error vector itself vanishes at pi (sin pi = 0)
  CHECK(rotation_error<double>(Eigen::Matrix3d::Identity(),
                               rot(Eigen::Vector3d::UnitX(), kPi))
            .norm() <= 1e-9);
}

TEST_CASE("quat_normalize") {
  using V4 = Vector4<double>;
  CHECK(quat_normalize<double>(V4(0, 0, 0, 2)).isApprox(V4(0, 0, 0, 1), 1e-15));
  CHECK(quat_normalize<double>(V4(0.5, 0.5, 0.5, 0.5)).isApprox(V4(0.5, 0.5, 0.5, 0.5), 1e-15));

  // scalar part zero: sign fixed by the first nonzero vector component
  CHECK(quat_normalize<double>(V4(1, 0, 0, 0)).isApprox(V4(1, 0, 0, 0), 1e-15));
  CHECK(quat_normalize<double>(V4(-1, 0, 0, 0)).isApprox(V4(1, 0, 0, 0), 1e-15));
  // negative scalar flips
  CHECK(quat_normalize<double>(V4(0, 0, 0, -3)).isApprox(V4(0, 0, 0, 1), 1e-15));

  CHECK_THROWS_AS(quat_normalize<double>(V4(0, 0, 0, 1e-13)), std::invalid_argument);
}

TEST_CASE("quat_normalize is idempotent") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vector4<double> q(g(rng), g(rng), g(rng), g(rng));
    if (q.norm() < 1e-9) continue;
    const auto once = quat_normalize<double>(q);
    const auto twice = quat_normalize<double>(once);
    CHECK((once - twice).norm() <= 1e-15);
    CHECK(once.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pose composition and inverse") {
  std::mt19937_64 rng(5);
  Pose a, b;
  a.R = testrig::random_rotation(rng);
  a.p = Eigen::Vector3d(0.1, -0.2, 0.3);
  b.R = testrig::random_rotation(rng);
  b.p = Eigen::Vector3d(-0.4, 0.5, 0.6);
  const Pose ab = a * b;
  const Eigen::Vector3d x(0.3, 0.1, -0.7);
  CHECK((ab * x).isApprox(a * (b * x), 1e-12));
  const Pose id = a.inverse() * a;
  CHECK(id.p.norm() <= 1e-12);
  CHECK(id.R.isApprox(Eigen::Matrix3d::Identity(), 1e-12));
}

TEST_CASE("quaternion round trip keeps the rotation") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix3d R = testrig::random_rotation(rng);
    CHECK(quat_to_rotation<double>(rotation_to_quat<double>(R)).isApprox(R, 1e-12));
  }
}
