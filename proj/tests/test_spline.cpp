#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "inhand/spline.hpp"

using namespace inhand;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("two-waypoint spline is the zero-slope cubic (smoothstep)") {
  VectorXd t(2);
  t << 0.0, 2.0;
  MatrixXd v(2, 1);
  v << 1.0, 5.0;
  const CubicBSpline s = CubicBSpline::interpolate(t, v);

  // closed-form: v0 + (v1 - v0) (3 u^2 - 2 u^3), u = t / T
  for (double tt : {0.0, 0.3, 0.5, 1.0, 1.7, 2.0}) {
    const double u = tt / 2.0;
    const double expect = 1.0 + 4.0 * (3 * u * u - 2 * u * u * u);
    CHECK(s.value(tt)(0) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(std::abs(s.derivative(0.0)(0)) <= 1e-12);
  CHECK(std::abs(s.derivative(2.0)(0)) <= 1e-12);
  CHECK(s.second_derivative(0.0)(0) == doctest::Approx(4.0 * 6.0 / 4.0).epsilon(1e-9));
}

TEST_CASE("interpolation hits every waypoint with zero end velocity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  VectorXd t(5);
  t << 0.0, 0.7, 1.1, 2.4, 3.0;
  MatrixXd v(5, 3);
  for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
  const CubicBSpline s = CubicBSpline::interpolate(t, v);
  for (int i = 0; i < t.size(); ++i) {
    CHECK((s.value(t(i)) - v.row(i).transpose()).norm() <= 1e-10);
  }
  CHECK(s.derivative(t(0)).norm() <= 1e-10);
  CHECK(s.derivative(t(4)).norm() <= 1e-10);
}

TEST_CASE("derivatives match finite differences at interior points") {
  VectorXd t(4);
  t << 0.0, 1.0, 1.5, 3.0;
  MatrixXd v(4, 2);
  v << 0.0, 1.0, 2.0, -1.0, -0.5, 0.5, 1.0, 0.0;
  const CubicBSpline s = CubicBSpline::interpolate(t, v);
  const double h = 1e-6;
  const double h2 = 1e-4;  // second difference: roundoff scales as eps/h^2
  for (double tt : {0.2, 0.9, 1.2, 2.0, 2.8}) {
    const VectorXd fd1 = (s.value(tt + h) - s.value(tt - h)) / (2 * h);
    CHECK((s.derivative(tt) - fd1).norm() <= 1e-6);
    const VectorXd fd2 =
        (s.value(tt + h2) - 2 * s.value(tt) + s.value(tt - h2)) / (h2 * h2);
    CHECK((s.second_derivative(tt) - fd2).norm() <= 1e-6);
  }
}

TEST_CASE("first derivative is continuous across knots") {
  VectorXd t(4);
  t << 0.0, 1.0, 2.0, 3.0;
  MatrixXd v(4, 1);
  v << 0.0, 1.0, -1.0, 0.5;
  const CubicBSpline s = CubicBSpline::interpolate(t, v);
  for (double knot : {1.0, 2.0}) {
    const double left = s.derivative(knot - 1e-9)(0);
    const double right = s.derivative(knot + 1e-9)(0);
    CHECK(left == doctest::Approx(right).epsilon(1e-6));
    const double l2 = s.second_derivative(knot - 1e-9)(0);
    const double r2 = s.second_derivative(knot + 1e-9)(0);
    CHECK(l2 == doctest::Approx(r2).epsilon(1e-4));
  }
}

TEST_CASE("constant waypoints give a constant spline") {
  VectorXd t(3);
  t << 0.0, 1.0, 2.0;
  MatrixXd v = MatrixXd::Constant(3, 2, 0.7);
  const CubicBSpline s = CubicBSpline::interpolate(t, v);
  for (double tt : {0.0, 0.5, 1.0, 1.9}) {
    CHECK((s.value(tt) - v.row(0).transpose()).norm() <= 1e-12);
    CHECK(s.derivative(tt).norm() <= 1e-12);
    CHECK(s.second_derivative(tt).norm() <= 1e-10);
  }
}

TEST_CASE("input validation") {
  VectorXd t(2);
  t << 0.0, 1.0;
  MatrixXd v(3, 1);
  v.setZero();
  CHECK_THROWS_AS(CubicBSpline::interpolate(t, v), std::invalid_argument);
  VectorXd bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS(CubicBSpline::interpolate(bad, v.topRows(2)), std::invalid_argument);
  VectorXd one(1);
  one << 0.0;
  CHECK_THROWS_AS(CubicBSpline::interpolate(one, v.topRows(1)), std::invalid_argument);
}

TEST_CASE("evaluation clamps outside the domain") {
  VectorXd t(2);
  t << 0.0, 1.0;
  MatrixXd v(2, 1);
  v << 2.0, 3.0;
  const CubicBSpline s = CubicBSpline::interpolate(t, v);
  CHECK(s.value(-1.0)(0) == doctest::Approx(2.0));
  CHECK(s.value(9.0)(0) == doctest::Approx(3.0));
}
