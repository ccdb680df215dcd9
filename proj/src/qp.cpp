#include "inhand/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace inhand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hypotenuse without overflow.
double dist2d(double a, double b) { return std::hypot(a, b); }

}  // namespace

// Goldfarb, Idnani (1983): dual method for strictly convex QP. The working-set
// factorization bookkeeping follows the classic QuadProg++ layout: J = L^-T Q
// and R from the QR decomposition of the active constraint normals in the
// metric of H.
QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                  const Eigen::VectorXd& b) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(A.rows());
  QpResult res;
  res.x.setZero(n);
  res.multipliers.setZero(m);

  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    res.message = "Hessian not positive definite";
    return res;
  }

  // Unconstrained minimum.
  Eigen::VectorXd x = llt.solve(-c);
  // J = L^-T
  Eigen::MatrixXd J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> active;  // constraint indices, |active| = iq
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m + 1);
  int iq = 0;
  double R_norm = 1.0;

  const double c_scale = std::max({1.0, H.cwiseAbs().maxCoeff(),
                                   m > 0 ? A.cwiseAbs().maxCoeff() : 0.0});
  const double tol = 1e-12 * c_scale;

  Eigen::VectorXd d(n), z(n), r(m + 1), np(n);
  const int max_iter = 10 * (n + m + 10);

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter;
    // Most violated inactive constraint.
    int p = -1;
    double worst = -tol;
    std::vector<char> is_active(m, 0);
    for (int k : active) is_active[k] = 1;
    for (int i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      const double s = A.row(i).dot(x) - b(i);
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) {
      res.success = true;
      break;
    }
    np = A.row(p).transpose();
    u(iq) = 0.0;
    double slack = worst;

    // Inner loop: take (possibly several) partial dual steps, then the full
    // primal step that activates constraint p.
    while (true) {
      d.noalias() = J.transpose() * np;
      z.setZero();
      for (int j = iq; j < n; ++j) z += J.col(j) * d(j);
      // r = R^-1 d (first iq components)
      for (int i = iq - 1; i >= 0; --i) {
        double sum = d(i);
        for (int j = i + 1; j < iq; ++j) sum -= R(i, j) * r(j);
        r(i) = sum / R(i, i);
      }

      // Dual step length (partial): smallest ratio over active constraints
      // whose multiplier would drop.
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < iq; ++k) {
        if (r(k) > tol) {
          const double ratio = u(k) / r(k);
          if (ratio < t1) {
            t1 = ratio;
            drop = k;
          }
        }
      }
      // Primal step length (full).
      const double zTn = z.dot(np);
      const double t2 = (z.norm() > tol && zTn > tol) ? -slack / zTn : kInf;
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        res.message = "constraints are inconsistent";
        return res;
      }

      if (t2 >= kInf) {
        // Step in dual space only: drop the blocking constraint.
        for (int k = 0; k < iq; ++k) u(k) -= t * r(k);
        u(iq) += t;
        // delete constraint 'drop'
        active.erase(active.begin() + drop);
        for (int i = drop; i < iq - 1; ++i) {
          u(i) = u(i + 1);
          R.col(i) = R.col(i + 1);
        }
        u(iq - 1) = u(iq);
        u(iq) = 0.0;
        R.col(iq - 1).setZero();
        iq--;
        // restore triangularity of R with Givens rotations
        for (int j = drop; j < iq; ++j) {
          double cc = R(j, j), ss = R(j + 1, j);
          double h = dist2d(cc, ss);
          if (h < tol) continue;
          cc /= h;
          ss /= h;
          R(j + 1, j) = 0.0;
          R(j, j) = h;
          if (cc < 0) {
            R(j, j) = -h;
            cc = -cc;
            ss = -ss;
          }
          const double xny = ss / (1.0 + cc);
          for (int k = j + 1; k < iq; ++k) {
            const double t1v = R(j, k), t2v = R(j + 1, k);
            R(j, k) = t1v * cc + t2v * ss;
            R(j + 1, k) = xny * (t1v + R(j, k)) - t2v;
          }
          for (int k = 0; k < n; ++k) {
            const double t1v = J(k, j), t2v = J(k, j + 1);
            J(k, j) = t1v * cc + t2v * ss;
            J(k, j + 1) = xny * (J(k, j) + t1v) - t2v;
          }
        }
        continue;
      }

      // Primal (and dual) step.
      x += t * z;
      for (int k = 0; k < iq; ++k) u(k) -= t * r(k);
      u(iq) += t;
      slack += t * zTn;

      if (t == t2) {
        // Add constraint p to the active set: rotate d so its tail vanishes.
        for (int j = n - 1; j >= iq + 1; --j) {
          double cc = d(j - 1), ss = d(j);
          const double h = dist2d(cc, ss);
          if (h < 1e-300) continue;
          d(j) = 0.0;
          ss /= h;
          cc /= h;
          if (cc < 0) {
            cc = -cc;
            ss = -ss;
            d(j - 1) = -h;
          } else {
            d(j - 1) = h;
          }
          const double xny = ss / (1.0 + cc);
          for (int k = 0; k < n; ++k) {
            const double t1v = J(k, j - 1), t2v = J(k, j);
            J(k, j - 1) = t1v * cc + t2v * ss;
            J(k, j) = xny * (t1v + J(k, j - 1)) - t2v;
          }
        }
        active.push_back(p);
        iq++;
        for (int i = 0; i < iq; ++i) R(i, iq - 1) = d(i);
        if (std::abs(d(iq - 1)) <= 1e-14 * R_norm) {
          res.message = "degenerate active set";
          return res;
        }
        R_norm = std::max(R_norm, std::abs(d(iq - 1)));
        break;  // back to violation scan
      }

      // Partial step: drop the blocking constraint and retry p.
      active.erase(active.begin() + drop);
      for (int i = drop; i < iq - 1; ++i) {
        u(i) = u(i + 1);
        R.col(i) = R.col(i + 1);
      }
      u(iq - 1) = u(iq);
      u(iq) = 0.0;
      R.col(iq - 1).setZero();
      iq--;
      for (int j = drop; j < iq; ++j) {
        double cc = R(j, j), ss = R(j + 1, j);
        double h = dist2d(cc, ss);
        if (h < tol) continue;
        cc /= h;
        ss /= h;
        R(j + 1, j) = 0.0;
        R(j, j) = h;
        if (cc < 0) {
          R(j, j) = -h;
          cc = -cc;
          ss = -ss;
        }
        const double xny = ss / (1.0 + cc);
        for (int k = j + 1; k < iq; ++k) {
          const double t1v = R(j, k), t2v = R(j + 1, k);
          R(j, k) = t1v * cc + t2v * ss;
          R(j + 1, k) = xny * (t1v + R(j, k)) - t2v;
        }
        for (int k = 0; k < n; ++k) {
          const double t1v = J(k, j), t2v = J(k, j + 1);
          J(k, j) = t1v * cc + t2v * ss;
          J(k, j + 1) = xny * (J(k, j) + t1v) - t2v;
        }
      }
      slack = A.row(p).dot(x) - b(p);
    }
    if (res.success) break;
  }

  if (!res.success && res.message.empty()) {
    // Violation scan never came back clean within the iteration budget.
    res.message = "iteration limit reached";
  }
  res.x = x;
  for (int k = 0; k < iq; ++k) res.multipliers(active[k]) = u(k);
  res.objective = 0.5 * x.dot(H * x) + c.dot(x);
  return res;
}

namespace {

// Exact re-solve of the least-squares problem on a fixed active set, with a
// KKT acceptance check. Returns true and fills x_out when the refined point
// is optimal for the original inequality-constrained problem.
bool polish_active_set(const Eigen::MatrixXd& W, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const std::vector<int>& act, Eigen::VectorXd& x_out) {
  const int n = static_cast<int>(W.cols());
  const int na = static_cast<int>(act.size());
  Eigen::MatrixXd Aact(na, n);
  Eigen::VectorXd bact(na);
  for (int i = 0; i < na; ++i) {
    Aact.row(i) = A.row(act[i]);
    bact(i) = b(act[i]);
  }

  Eigen::VectorXd x;
  if (na == 0) {
    x = W.completeOrthogonalDecomposition().solve(y);
  } else {
    // Particular solution of A_act x = b_act plus null-space correction.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Aact);
    const Eigen::VectorXd x0 = cod.solve(bact);
    // Null space basis via full QR of A_act^T.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aact.transpose());
    const int rank = static_cast<int>(qr.rank());
    if (rank >= n) {
      x = x0;
    } else {
      const Eigen::MatrixXd Q = qr.householderQ();
      const Eigen::MatrixXd Z = Q.rightCols(n - rank);
      const Eigen::VectorXd zeta =
          (W * Z).completeOrthogonalDecomposition().solve(y - W * x0);
      x = x0 + Z * zeta;
    }
  }

  const double scale = std::max(1.0, y.norm());
  // Primal feasibility.
  if (A.rows() > 0) {
    const Eigen::VectorXd slack = A * x - b;
    const double feas_tol = 1e-9 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
    if (slack.minCoeff() < -feas_tol) return false;
  }
  // Dual feasibility: gradient must be a nonnegative combination of active
  // normals, g = A_act^T lambda with lambda >= 0 (constraints A x >= b).
  const Eigen::VectorXd g = 2.0 * W.transpose() * (W * x - y);
  if (na == 0) {
    if (g.lpNorm<Eigen::Infinity>() > 1e-7 * std::max(1.0, scale)) return false;
  } else {
    const Eigen::VectorXd lambda =
        Aact.transpose().completeOrthogonalDecomposition().solve(g);
    if ((Aact.transpose() * lambda - g).lpNorm<Eigen::Infinity>() > 1e-7 * std::max(1.0, scale)) {
      return false;
    }
    if (lambda.minCoeff() < -1e-7 * std::max(1.0, scale)) return false;
  }
  x_out = x;
  return true;
}

}  // namespace

QpResult solve_lsi(const Eigen::MatrixXd& W, const Eigen::VectorXd& y, const Eigen::MatrixXd& A,
                   const Eigen::VectorXd& b) {
  const int n = static_cast<int>(W.cols());
  Eigen::MatrixXd H = 2.0 * W.transpose() * W;
  const double reg = 1e-10 * std::max(1.0, H.cwiseAbs().maxCoeff());
  H.diagonal().array() += reg;
  const Eigen::VectorXd c = -2.0 * W.transpose() * y;

  QpResult res = solve_qp(H, c, A, b);
  if (!res.success) return res;

  // Detect the active set from the regularized solution and re-solve exactly.
  std::vector<int> act;
  const double scale = std::max(1.0, res.x.lpNorm<Eigen::Infinity>());
  for (int i = 0; i < A.rows(); ++i) {
    if (A.row(i).dot(res.x) - b(i) < 1e-8 * scale) act.push_back(i);
  }
  Eigen::VectorXd polished(n);
  if (polish_active_set(W, y, A, b, act, polished)) {
    res.x = polished;
  }
  res.objective = (W * res.x - y).squaredNorm();
  return res;
}

QpResult solve_box_ls(const Eigen::MatrixXd& W, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(W.cols());
  Eigen::MatrixXd A(2 * n, n);
  A.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  A.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(2 * n);
  b.head(n) = lo;
  b.tail(n) = -hi;
  return solve_lsi(W, y, A, b);
}

}  // namespace inhand
