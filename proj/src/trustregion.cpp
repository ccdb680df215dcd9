#include "inhand/trustregion.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "inhand/qp.hpp"

namespace inhand {

namespace {

void pack(const std::vector<LinearConstraint>& cs, int n, Eigen::MatrixXd& A,
          Eigen::VectorXd& b) {
  A.resize(static_cast<int>(cs.size()), n);
  b.resize(static_cast<int>(cs.size()));
  for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
    A.row(i) = cs[i].a.transpose();
    b(i) = cs[i].b;
  }
}

}  // namespace

Eigen::VectorXd project_to_constraints(const Eigen::VectorXd& x,
                                       const std::vector<LinearConstraint>& constraints) {
  if (constraints.empty()) return x;
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  pack(constraints, n, A, b);
  if (((A * x - b).array() >= 0.0).all()) return x;
  const QpResult res = solve_qp(Eigen::MatrixXd::Identity(n, n), -x, A, b);
  if (!res.success) throw std::runtime_error("project_to_constraints: " + res.message);
  return res.x;
}

TrustRegionResult minimize_trust_region(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x0,
                                        const std::vector<LinearConstraint>& constraints,
                                        const TrustRegionOptions& options) {
  const int n = static_cast<int>(x0.size());
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  pack(constraints, n, A, b);
  const bool has_constraints = A.rows() > 0;
  if (has_constraints && (A * x0 - b).minCoeff() < -1e-9) {
    throw std::invalid_argument("minimize_trust_region: x0 infeasible");
  }

  TrustRegionResult res;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  Eigen::VectorXd x = x0;
  double fx = eval(x);
  res.f0 = fx;
  Eigen::VectorXd best_x = x;
  double best_f = fx;

  double rho = options.rho_begin;
  while (rho >= options.rho_end && evals + n + 1 <= options.max_evals) {
    // Forward-difference linear model at scale rho; probe points are
    // projected back into the polytope when a bound is in the way.
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd probes(n, n);
    bool degenerate_all = true;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd p = x;
      p(i) += rho;
      p = project_to_constraints(p, constraints);
      if ((p - x).norm() < 1e-12) {
        p = x;
        p(i) -= rho;
        p = project_to_constraints(p, constraints);
      }
      probes.col(i) = p - x;
      if (probes.col(i).norm() >= 1e-12) degenerate_all = false;
    }
    if (degenerate_all) break;  // feasible set has no volume around x

    // Solve probes^T g = delta_f for the model gradient (least squares
    // handles probes squashed onto the constraint surface).
    Eigen::VectorXd df(n);
    for (int i = 0; i < n; ++i) {
      if (probes.col(i).norm() < 1e-12) {
        df(i) = 0.0;
      } else {
        const double fp = eval(x + probes.col(i));
        if (fp < best_f) {
          best_f = fp;
          best_x = x + probes.col(i);
        }
        df(i) = fp - fx;
      }
    }
    g = probes.transpose().completeOrthogonalDecomposition().solve(df);

    const double gn = g.norm();
    if (gn < 1e-14) {
      rho *= 0.5;
      continue;
    }

    // Regularized model step: minimize g.d + (|g|/2 rho)|d|^2 within the
    // polytope; the unconstrained solution is a steepest-descent step of
    // length rho.
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) * (gn / rho);
    Eigen::MatrixXd Ad = A;
    Eigen::VectorXd bd = b;
    if (has_constraints) {
      bd = b - A * x;  // constraints on d
    } else {
      Ad.resize(0, n);
      bd.resize(0);
    }
    const QpResult step = solve_qp(H, g, Ad, bd);
    if (!step.success || step.x.norm() < 1e-14) {
      rho *= 0.5;
      continue;
    }
    if (evals >= options.max_evals) break;
    const Eigen::VectorXd xn = project_to_constraints(x + step.x, constraints);
    const double fn = eval(xn);
    if (fn < best_f) {
      best_f = fn;
      best_x = xn;
    }
    const double predicted = -g.dot(step.x);
    if (fn < fx - 0.1 * std::max(predicted, 0.0)) {
      x = xn;
      fx = fn;
    } else {
      if (best_f < fx) {  // a probe found the better point; recenter there
        x = best_x;
        fx = best_f;
      }
      rho *= 0.5;
    }
  }

  res.x = best_x;
  res.fx = best_f;
  res.evals = evals;
  return res;
}

}  // namespace inhand
