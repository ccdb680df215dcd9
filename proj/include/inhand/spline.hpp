#pragma once

#include <Eigen/Dense>

namespace inhand {

// Clamped cubic B-spline curve interpolating waypoints at given times with
// zero first derivative at both ends. The knot vector has multiplicity 4 at
// the ends and one knot per interior waypoint, so the spline is C2 and the
// interpolation system is (N+2) x (N+2).
class CubicBSpline {
 public:
  CubicBSpline() = default;

  // times: strictly increasing, size N >= 2; values: N x D, one row per
  // waypoint. Throws std::invalid_argument on bad input.
  static CubicBSpline interpolate(const Eigen::VectorXd& times, const Eigen::MatrixXd& values);

  // Curve value / first / second derivative at t (t clamped to [t1, tN]).
  Eigen::VectorXd value(double t) const { return eval(t, 0); }
  Eigen::VectorXd derivative(double t) const { return eval(t, 1); }
  Eigen::VectorXd second_derivative(double t) const { return eval(t, 2); }

  double t_begin() const { return knots_(3); }
  double t_end() const { return knots_(knots_.size() - 4); }
  int dims() const { return static_cast<int>(ctrl_.cols()); }

  const Eigen::MatrixXd& control_points() const { return ctrl_; }

 private:
  Eigen::VectorXd eval(double t, int order) const;

  Eigen::VectorXd knots_;  // size N + 6
  Eigen::MatrixXd ctrl_;   // (N + 2) x D
};

// Nonzero cubic basis functions and derivatives at u: returns a
// (orders+1) x 4 matrix whose row k holds the k-th derivatives of the four
// basis functions supported on the span. span is the knot span index.
Eigen::MatrixXd cubic_basis_derivatives(const Eigen::VectorXd& knots, int span, double u,
                                        int orders);

int find_knot_span(const Eigen::VectorXd& knots, double u);

}  // namespace inhand
