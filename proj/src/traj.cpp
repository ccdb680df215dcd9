#include "inhand/traj.hpp"

#include <cmath>
#include <stdexcept>

#include "inhand/trustregion.hpp"

namespace inhand {

namespace {

// Kinematics of the normalized quaternion curve q = u/|u|: projected first and
// second derivatives, then w = 2 vec(qdot * conj(q)), dw = 2 vec(qddot * conj(q)).
void quat_kinematics(const Eigen::Vector4d& u, const Eigen::Vector4d& du,
                     const Eigen::Vector4d& ddu, Eigen::Matrix3d& R, Eigen::Vector3d& w,
                     Eigen::Vector3d& dw) {
  const double n = u.norm();
  if (std::abs(n - 1.0) > 0.05) {
    throw std::runtime_error(
        "fit_and_sample: interpolated quaternion drifted more than 0.05 from unit norm");
  }
  const Eigen::Vector4d q = u / n;
  const double ud = u.dot(du) / (n * n);
  const Eigen::Vector4d qd = du / n - q * ud;
  const Eigen::Vector4d qdd = ddu / n - (2.0 * du * ud) / n -
                              q * ((du.dot(du) + u.dot(ddu)) / (n * n)) + 3.0 * q * ud * ud;

  const Eigen::Quaterniond Q(q(3), q(0), q(1), q(2));
  const Eigen::Quaterniond Qd(qd(3), qd(0), qd(1), qd(2));
  const Eigen::Quaterniond Qdd(qdd(3), qdd(0), qdd(1), qdd(2));
  const Eigen::Quaterniond qc = Q.conjugate();
  w = 2.0 * (Qd * qc).vec();
  dw = 2.0 * (Qdd * qc).vec();
  R = Q.toRotationMatrix();
}

TrajSample sample_at(const CubicBSpline& pos, const CubicBSpline& quat, double t) {
  TrajSample s;
  s.t = t;
  s.pose.p = pos.value(t);
  s.v = pos.derivative(t);
  s.dv = pos.second_derivative(t);
  quat_kinematics(quat.value(t), quat.derivative(t), quat.second_derivative(t), s.pose.R, s.w,
                  s.dw);
  return s;
}

}  // namespace

TrajSample ObjectTrajectory::at(double t) const { return sample_at(position, quaternion, t); }

ObjectTrajectory fit_and_sample(const PosePath& path, const Eigen::VectorXd& timestamps, int M) {
  const int N = static_cast<int>(path.waypoints.size());
  if (N < 2) throw std::invalid_argument("fit_and_sample: need at least 2 waypoints");
  if (timestamps.size() != N) {
    throw std::invalid_argument("fit_and_sample: one timestamp per waypoint");
  }
  if (std::abs(timestamps(0)) > 1e-12) {
    throw std::invalid_argument("fit_and_sample: first timestamp must be 0");
  }
  for (int i = 1; i < N; ++i) {
    if (!(timestamps(i) > timestamps(i - 1))) {
      throw std::invalid_argument("fit_and_sample: timestamps must increase");
    }
  }
  if (M < 2) throw std::invalid_argument("fit_and_sample: M must be at least 2");

  Eigen::MatrixXd pos(N, 3);
  Eigen::MatrixXd quat(N, 4);
  for (int i = 0; i < N; ++i) {
    pos.row(i) = path.waypoints[i].p.transpose();
    Vector4<double> q = rotation_to_quat<double>(path.waypoints[i].R);
    if (i > 0 && quat.row(i - 1).dot(q.transpose()) < 0.0) q = -q;  // hemisphere alignment
    quat.row(i) = q.transpose();
  }

  ObjectTrajectory traj;
  traj.waypoints = path.waypoints;
  traj.timestamps = timestamps;
  traj.position = CubicBSpline::interpolate(timestamps, pos);
  traj.quaternion = CubicBSpline::interpolate(timestamps, quat);

  const double T = timestamps(N - 1);
  traj.samples.reserve(M);
  for (int m = 0; m < M; ++m) {
    const double t = T * static_cast<double>(m) / (M - 1);
    traj.samples.push_back(sample_at(traj.position, traj.quaternion, t));
  }
  return traj;
}

TrajectoryCost trajectory_cost(const ObjectTrajectory& traj,
                               const std::vector<Grasp>& candidates,
                               GraspCostEvaluator& evaluator) {
  if (candidates.empty()) throw std::invalid_argument("trajectory_cost: no candidate grasps");
  const int M = traj.sample_count();
  TrajectoryCost out;
  out.best_grasp.resize(M, 0);
  out.sample_cost.resize(M, 0.0);
  for (int m = 0; m < M; ++m) {
    double best = std::numeric_limits<double>::infinity();
    int best_g = 0;
    for (int g = 0; g < static_cast<int>(candidates.size()); ++g) {
      const GraspSampleCost& c =
          evaluator.evaluate(candidates[g], traj.samples[m], m + 1, M);
      if (c.cost < best) {
        best = c.cost;
        best_g = g;
      }
    }
    out.sample_cost[m] = best;
    out.best_grasp[m] = best_g;
    out.total += best;
  }
  return out;
}

TimestampOptimization optimize_timestamps(const PosePath& path,
                                          const std::vector<Grasp>& candidates,
                                          GraspCostEvaluator& evaluator,
                                          const TrajParams& params) {
  const int N = static_cast<int>(path.waypoints.size());
  if (N < 2) throw std::invalid_argument("optimize_timestamps: need at least 2 waypoints");
  if ((N - 1) * params.dt_min > params.T_max + 1e-12) {
    throw std::invalid_argument("optimize_timestamps: (N-1) dt_min exceeds T_max");
  }

  const int n = N - 1;  // free variables t_2 .. t_N
  // Constraints: t_2 >= dt_min, t_i - t_{i-1} >= dt_min, t_N <= T_max.
  std::vector<LinearConstraint> cs;
  for (int i = 0; i < n; ++i) {
    LinearConstraint c;
    c.a = Eigen::VectorXd::Zero(n);
    c.a(i) = 1.0;
    if (i > 0) c.a(i - 1) = -1.0;
    c.b = params.dt_min;
    cs.push_back(c);
  }
  {
    LinearConstraint c;
    c.a = Eigen::VectorXd::Zero(n);
    c.a(n - 1) = -1.0;
    c.b = -params.T_max;
    cs.push_back(c);
  }

  auto to_timestamps = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd t(N);
    t(0) = 0.0;
    t.tail(n) = x;
    return t;
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    const ObjectTrajectory traj = fit_and_sample(path, to_timestamps(x), params.M);
    return trajectory_cost(traj, candidates, evaluator).total;
  };

  // Initial guess: uniform spacing stretched to T_max.
  Eigen::VectorXd x0(n);
  for (int i = 0; i < n; ++i) x0(i) = params.T_max * (i + 1) / static_cast<double>(n);

  TrustRegionOptions opts;
  opts.max_evals = params.opt_evals;
  opts.rho_end = params.opt_rho_end;
  opts.rho_begin = std::max(4.0 * opts.rho_end, 0.25 * (params.T_max / n - params.dt_min));
  const TrustRegionResult res = minimize_trust_region(objective, x0, cs, opts);

  TimestampOptimization out;
  out.trajectory = fit_and_sample(path, to_timestamps(res.x), params.M);
  out.cost = trajectory_cost(out.trajectory, candidates, evaluator);
  out.initial_cost = res.f0;
  out.evaluations = res.evals;
  return out;
}

}  // namespace inhand
