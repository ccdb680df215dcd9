#include "inhand/cost.hpp"

#include <cmath>

namespace inhand {

GraspCostEvaluator::GraspCostEvaluator(const HandModel& hand, const ObjectModel& obj,
                                       const Environment& env, const Eigen::VectorXd& q_home,
                                       const IkParams& ik_params,
                                       const WrenchParams& wrench_params,
                                       const CostWeights& weights, const ExternalWrench& w_ext)
    : hand_(hand),
      obj_(obj),
      env_(env),
      q_home_(q_home),
      ik_params_(ik_params),
      wrench_params_(wrench_params),
      weights_(weights),
      w_ext_(w_ext) {}

GraspCostEvaluator::Key GraspCostEvaluator::make_key(const Grasp& grasp, const TrajSample& s,
                                                     bool wext_on) const {
  constexpr double kQuant = 1e9;  // 1e-9 resolution on poses and rates
  Key key;
  key.reserve(4 + 2 * grasp.size() + 20);
  key.push_back(wext_on ? 1 : 0);
  for (const auto& c : grasp.contacts) {
    key.push_back(c.link);
    key.push_back(c.object_point);
    key.push_back(c.mode == ContactMode::Sliding ? 1 : 0);
  }
  auto push_vec = [&](const Eigen::Vector3d& v) {
    for (int i = 0; i < 3; ++i) key.push_back(std::llround(v(i) * kQuant));
  };
  push_vec(s.pose.p);
  const Vector4<double> q = rotation_to_quat<double>(s.pose.R);
  for (int i = 0; i < 4; ++i) key.push_back(std::llround(q(i) * kQuant));
  push_vec(s.v);
  push_vec(s.w);
  push_vec(s.dv);
  push_vec(s.dw);
  return key;
}

const GraspSampleCost& GraspCostEvaluator::evaluate(const Grasp& grasp, const TrajSample& s,
                                                    int m, int M) {
  const bool wext_on = w_ext_.active_at(m, M);
  const Key key = make_key(grasp, s, wext_on);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  GraspSampleCost out;
  const IkResult ik = solve_ik(hand_, q_home_, s.pose, grasp, env_, ik_params_);
  out.d_star = ik.d_star;
  out.max_dp = max_ik_error(ik);
  out.q_star = ik.q_star;
  out.collision = (ik.termination == IkTermination::EnvironmentContact);

  const Eigen::Vector3d f_ext = wext_on ? w_ext_.force : Eigen::Vector3d::Zero();
  const Eigen::Vector3d tau_ext = wext_on ? w_ext_.torque : Eigen::Vector3d::Zero();
  const ContactForceResult fr =
      grasp_metrics(obj_, grasp, s.pose, s.w, s.dv, s.dw, f_ext, tau_ext, wrench_params_);
  out.e_star = fr.metrics.e_star;
  out.f_star = fr.metrics.f_star;
  out.f_hat_total = fr.metrics.f_hat_total;
  out.cost = out.d_star + weights_.w_e * out.e_star + weights_.w_f * out.f_star;

  return cache_.emplace(key, std::move(out)).first->second;
}

}  // namespace inhand
