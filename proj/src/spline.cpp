#include "inhand/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace inhand {

namespace {
constexpr int kDegree = 3;
}

int find_knot_span(const Eigen::VectorXd& knots, double u) {
  // valid spans are [degree, n_ctrl-1]; clamp u into the curve domain
  const int n_ctrl = static_cast<int>(knots.size()) - kDegree - 1;
  const double lo = knots(kDegree);
  const double hi = knots(n_ctrl);
  if (u >= hi) return n_ctrl - 1;
  if (u <= lo) return kDegree;
  int span = kDegree;
  while (span < n_ctrl - 1 && u >= knots(span + 1)) ++span;
  return span;
}

// The NURBS Book, algorithm A2.3 (DersBasisFuns), degree 3.
Eigen::MatrixXd cubic_basis_derivatives(const Eigen::VectorXd& knots, int span, double u,
                                        int orders) {
  const int p = kDegree;
  Eigen::MatrixXd ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left(j) = u - knots(span + 1 - j);
    right(j) = knots(span + j) - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right(r + 1) + left(j - r);
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right(r + 1) * temp;
      saved = left(j - r) * temp;
    }
    ndu(j, j) = saved;
  }

  Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(orders + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= orders; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int k = 1; k <= orders; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= fac;
    fac *= (p - k);
  }
  return ders;
}

CubicBSpline CubicBSpline::interpolate(const Eigen::VectorXd& times,
                                       const Eigen::MatrixXd& values) {
  const int N = static_cast<int>(times.size());
  if (N < 2) throw std::invalid_argument("CubicBSpline: need at least 2 waypoints");
  if (values.rows() != N) throw std::invalid_argument("CubicBSpline: one value row per time");
  for (int i = 1; i < N; ++i) {
    if (!(times(i) > times(i - 1))) {
      throw std::invalid_argument("CubicBSpline: times must be strictly increasing");
    }
  }

  CubicBSpline s;
  const int n_ctrl = N + 2;
  s.knots_.resize(N + 6);
  for (int i = 0; i < 4; ++i) {
    s.knots_(i) = times(0);
    s.knots_(N + 2 + i) = times(N - 1);
  }
  for (int i = 1; i < N - 1; ++i) s.knots_(3 + i) = times(i);

  // Collocation: N interpolation rows plus zero end-derivative rows.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_ctrl, n_ctrl);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_ctrl, values.cols());
  int row = 0;
  auto add_row = [&](double t, int order, const Eigen::RowVectorXd* value) {
    const int span = find_knot_span(s.knots_, t);
    const Eigen::MatrixXd ders = cubic_basis_derivatives(s.knots_, span, t, order);
    for (int j = 0; j <= kDegree; ++j) A(row, span - kDegree + j) = ders(order, j);
    if (value) rhs.row(row) = *value;
    ++row;
  };
  Eigen::RowVectorXd v = values.row(0);
  add_row(times(0), 0, &v);
  add_row(times(0), 1, nullptr);
  for (int i = 1; i < N - 1; ++i) {
    v = values.row(i);
    add_row(times(i), 0, &v);
  }
  add_row(times(N - 1), 1, nullptr);
  v = values.row(N - 1);
  add_row(times(N - 1), 0, &v);

  s.ctrl_ = A.partialPivLu().solve(rhs);
  return s;
}

Eigen::VectorXd CubicBSpline::eval(double t, int order) const {
  const double u = std::clamp(t, t_begin(), t_end());
  const int span = find_knot_span(knots_, u);
  const Eigen::MatrixXd ders = cubic_basis_derivatives(knots_, span, u, order);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ctrl_.cols());
  for (int j = 0; j <= kDegree; ++j) {
    out += ders(order, j) * ctrl_.row(span - kDegree + j).transpose();
  }
  return out;
}

}  // namespace inhand
