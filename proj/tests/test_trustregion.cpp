#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "inhand/trustregion.hpp"

using namespace inhand;
using Eigen::VectorXd;

namespace {
std::vector<LinearConstraint> box1d(double lo, double hi) {
  LinearConstraint a, b;
  a.a = VectorXd::Ones(1);
  a.b = lo;
  b.a = -VectorXd::Ones(1);
  b.b = -hi;
  return {a, b};
}
}  // namespace

TEST_CASE("1-D quadratic with interior minimum") {
  auto f = [](const VectorXd& x) { return (x(0) - 0.7) * (x(0) - 0.7); };
  VectorXd x0(1);
  x0 << 3.0;
  TrustRegionOptions opts;
  opts.max_evals = 200;
  opts.rho_begin = 1.0;
  opts.rho_end = 1e-6;
  const auto res = minimize_trust_region(f, x0, box1d(0.0, 10.0), opts);
  CHECK(res.x(0) == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(res.fx <= res.f0);
}

TEST_CASE("minimum pinned at a constraint") {
  auto f = [](const VectorXd& x) { return x(0); };
  VectorXd x0(1);
  x0 << 5.0;
  const auto res = minimize_trust_region(f, x0, box1d(2.0, 10.0), {});
  CHECK(res.x(0) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("fully constrained problem returns the start point") {
  auto f = [](const VectorXd& x) { return x.squaredNorm(); };
  VectorXd x0(1);
  x0 << 4.0;
  const auto res = minimize_trust_region(f, x0, box1d(4.0, 4.0), {});
  CHECK(res.x(0) == doctest::Approx(4.0));
  CHECK(res.evals >= 1);
}

TEST_CASE("2-D constrained quadratic") {
  // minimize (x-3)^2 + (y+1)^2 s.t. x <= 1, y >= 0 -> (1, 0)
  auto f = [](const VectorXd& x) {
    return (x(0) - 3.0) * (x(0) - 3.0) + (x(1) + 1.0) * (x(1) + 1.0);
  };
  std::vector<LinearConstraint> cs;
  LinearConstraint c1;
  c1.a = VectorXd::Zero(2);
  c1.a(0) = -1.0;
  c1.b = -1.0;  // -x >= -1
  LinearConstraint c2;
  c2.a = VectorXd::Zero(2);
  c2.a(1) = 1.0;
  c2.b = 0.0;  // y >= 0
  cs = {c1, c2};
  VectorXd x0(2);
  x0 << 0.0, 2.0;
  TrustRegionOptions opts;
  opts.max_evals = 300;
  opts.rho_begin = 1.0;
  opts.rho_end = 1e-6;
  const auto res = minimize_trust_region(f, x0, cs, opts);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(res.x(1) == doctest::Approx(0.0).epsilon(1e-3).scale(1.0));
}

TEST_CASE("never returns worse than the initial point") {
  // nasty nonsmooth objective
  auto f = [](const VectorXd& x) { return std::abs(x(0) - 1.3) + 0.5 * std::sin(8 * x(0)); };
  VectorXd x0(1);
  x0 << 0.0;
  const auto res = minimize_trust_region(f, x0, box1d(-5.0, 5.0), {});
  CHECK(res.fx <= res.f0 + 1e-12);
}

TEST_CASE("infeasible start throws") {
  auto f = [](const VectorXd& x) { return x.squaredNorm(); };
  VectorXd x0(1);
  x0 << -3.0;
  CHECK_THROWS_AS(minimize_trust_region(f, x0, box1d(0.0, 1.0), {}), std::invalid_argument);
}

TEST_CASE("projection onto the polytope") {
  VectorXd x(2);
  x << -1.0, 0.5;
  std::vector<LinearConstraint> cs;
  LinearConstraint c;
  c.a = VectorXd::Zero(2);
  c.a(0) = 1.0;
  c.b = 0.0;  // x >= 0
  cs = {c};
  const VectorXd p = project_to_constraints(x, cs);
  CHECK(p(0) == doctest::Approx(0.0));
  CHECK(p(1) == doctest::Approx(0.5));
}
