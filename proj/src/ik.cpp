#include "inhand/ik.hpp"

#include <stdexcept>

#include "inhand/qp.hpp"

namespace inhand {

Eigen::VectorXd ik_step(const Eigen::VectorXd& q,
                        const std::vector<Eigen::Vector3d>& targets,
                        const std::vector<Eigen::MatrixXd>& jacobians,
                        double gain, const Eigen::VectorXd& q_min,
                        const Eigen::VectorXd& q_max) {
  if (gain <= 0.0) throw std::invalid_argument("ik_step: gain must be positive");
  if (targets.size() != jacobians.size() || targets.empty()) {
    throw std::invalid_argument("ik_step: one Jacobian per target required");
  }
  const int n = static_cast<int>(q.size());
  const int k = static_cast<int>(targets.size());
  Eigen::MatrixXd W(3 * k, n);
  Eigen::VectorXd y(3 * k);
  for (int i = 0; i < k; ++i) {
    W.middleRows(3 * i, 3) = jacobians[i];
    y.segment(3 * i, 3) = targets[i];
  }
  const Eigen::VectorXd lo = (q_min - q) / gain;
  const Eigen::VectorXd hi = (q_max - q) / gain;
  QpResult res = solve_box_ls(W, y, lo.cwiseMin(0.0), hi.cwiseMax(0.0));
  if (!res.success) {
    throw std::runtime_error("ik_step: QP solver failed: " + res.message);
  }
  return res.x;
}

std::vector<Eigen::Vector3d> contact_residuals(const HandModel& hand,
                                               const std::vector<Pose>& link_poses,
                                               const Pose& object_pose, const Grasp& grasp) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(grasp.contacts.size());
  for (const auto& c : grasp.contacts) {
    const Eigen::Vector3d on_object = object_pose * c.c_O;
    const Eigen::Vector3d on_hand = contact_point_world(hand, link_poses, c.link, c.c_J);
    out.push_back(on_object - on_hand);
  }
  return out;
}

namespace {

double total_sq(const std::vector<Eigen::Vector3d>& errs) {
  double d = 0.0;
  for (const auto& e : errs) d += e.squaredNorm();
  return d;
}

bool links_hit_environment(const HandModel& hand, const std::vector<Pose>& link_poses,
                           const Environment& env, double penetration) {
  if (env.statics.empty()) return false;
  const auto prims = hand_world_primitives(hand, link_poses, /*with_palm=*/false);
  for (const auto& lp : prims) {
    for (const auto& sp : env.statics) {
      if (distance(sp, lp) < -penetration) return true;
    }
  }
  return false;
}

}  // namespace

IkResult solve_ik(const HandModel& hand, const Eigen::VectorXd& q0, const Pose& object_pose,
                  const Grasp& grasp, const Environment& env, const IkParams& params) {
  if (grasp.empty()) throw std::invalid_argument("solve_ik: empty grasp");
  const Eigen::VectorXd qmin = hand.q_min();
  const Eigen::VectorXd qmax = hand.q_max();

  IkResult best;
  Eigen::VectorXd q = q0;
  auto poses = forward_kinematics(hand, q);
  auto errs = contact_residuals(hand, poses, object_pose, grasp);
  best.q_star = q;
  best.contact_errors = errs;
  best.d_star = total_sq(errs);
  best.termination = IkTermination::IterationCap;

  if (best.d_star < params.d_threshold) {
    best.termination = IkTermination::Threshold;
    return best;
  }

  for (int it = 1; it <= params.max_iterations; ++it) {
    const auto cur_poses = forward_kinematics(hand, q);
    std::vector<Eigen::MatrixXd> jacs;
    jacs.reserve(grasp.contacts.size());
    for (const auto& c : grasp.contacts) {
      jacs.push_back(contact_jacobian(hand, cur_poses, c.link, c.c_J));
    }
    std::vector<Eigen::Vector3d> step_targets = errs;
    for (auto& t : step_targets) {
      const double n = t.norm();
      if (n > params.step_max) t *= params.step_max / n;
    }
    const Eigen::VectorXd dq = ik_step(q, step_targets, jacs, params.gain, qmin, qmax);
    q += dq;
    poses = forward_kinematics(hand, q);
    errs = contact_residuals(hand, poses, object_pose, grasp);
    const double d = total_sq(errs);
    best.iterations = it;

    if (links_hit_environment(hand, poses, env, params.env_penetration)) {
      best.termination = IkTermination::EnvironmentContact;
      return best;  // keep the last accepted (collision-free) iterate
    }
    if (d >= best.d_star) {
      best.termination = IkTermination::ErrorIncrease;
      return best;
    }
    best.q_star = q;
    best.contact_errors = errs;
    best.d_star = d;
    if (d < params.d_threshold) {
      best.termination = IkTermination::Threshold;
      return best;
    }
  }
  best.termination = IkTermination::IterationCap;
  return best;
}

double max_ik_error(const IkResult& result) {
  double m = 0.0;
  for (const auto& e : result.contact_errors) m = std::max(m, e.squaredNorm());
  return m;
}

}  // namespace inhand
