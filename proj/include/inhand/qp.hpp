#pragma once

#include <Eigen/Dense>
#include <string>

namespace inhand {

struct QpResult {
  bool success{false};
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per inequality row, >= 0
  double objective{0.0};
  int iterations{0};
  std::string message;
};

// Strictly convex quadratic program
//   minimize 1/2 x^T H x + c^T x   subject to  A x >= b
// solved with the Goldfarb-Idnani dual active-set method. H must be positive
// definite (callers add a small Tikhonov term when their Hessian is only
// semidefinite).
QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                  const Eigen::VectorXd& b);

// Least squares with linear inequality constraints
//   minimize ||W x - y||^2   subject to  A x >= b.
// W may be rank deficient. Internally solves the regularized strictly convex
// QP, then re-solves exactly on the detected active set and keeps the refined
// point when its KKT check passes; the reported objective is ||W x - y||^2.
QpResult solve_lsi(const Eigen::MatrixXd& W, const Eigen::VectorXd& y, const Eigen::MatrixXd& A,
                   const Eigen::VectorXd& b);

// Box-constrained least squares: minimize ||W x - y||^2, lo <= x <= hi.
QpResult solve_box_ls(const Eigen::MatrixXd& W, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

}  // namespace inhand
