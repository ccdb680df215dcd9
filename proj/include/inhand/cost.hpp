#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "inhand/ik.hpp"
#include "inhand/model.hpp"
#include "inhand/wrench.hpp"

namespace inhand {

// Object kinematics at one trajectory sample.
struct TrajSample {
  double t{0.0};
  Pose pose;
  Eigen::Vector3d v{Eigen::Vector3d::Zero()};
  Eigen::Vector3d w{Eigen::Vector3d::Zero()};
  Eigen::Vector3d dv{Eigen::Vector3d::Zero()};
  Eigen::Vector3d dw{Eigen::Vector3d::Zero()};
};

// External wrench schedule for a task: the expected wrench acts at the final
// sample only (tool-use load), or at every sample.
struct ExternalWrench {
  Eigen::Vector3d force{Eigen::Vector3d::Zero()};
  Eigen::Vector3d torque{Eigen::Vector3d::Zero()};
  bool last_sample_only{true};

  bool active_at(int m, int M) const { return !last_sample_only || m == M; }
  Eigen::Vector3d force_at(int m, int M) const {
    return active_at(m, M) ? force : Eigen::Vector3d::Zero();
  }
  Eigen::Vector3d torque_at(int m, int M) const {
    return active_at(m, M) ? torque : Eigen::Vector3d::Zero();
  }
};

struct CostWeights {
  double w_e{1.0};   // residual-wrench weight in the trajectory cost
  double w_f{0.01};  // contact-force weight in the trajectory cost
};

// IK + contact-force metrics for using a grasp at a sample.
struct GraspSampleCost {
  double d_star{0.0};       // total squared IK error
  double max_dp{0.0};       // max per-contact squared IK error
  double e_star{0.0};       // residual wrench
  double f_star{0.0};       // sum of squared contact forces
  double f_hat_total{0.0};  // ||f_hat||^2 + w_t ||tau_hat||^2
  bool collision{false};    // IK stopped on environment contact
  double cost{0.0};         // d* + w_e e* + w_f f*
  Eigen::VectorXd q_star;
};

// Evaluates and caches per-(grasp, sample) costs. IK runs from a fixed home
// posture so results are a pure function of (grasp, sample kinematics);
// entries are keyed by the grasp contacts and quantized kinematics.
class GraspCostEvaluator {
 public:
  GraspCostEvaluator(const HandModel& hand, const ObjectModel& obj, const Environment& env,
                     const Eigen::VectorXd& q_home, const IkParams& ik_params,
                     const WrenchParams& wrench_params, const CostWeights& weights,
                     const ExternalWrench& w_ext);

  // m, M are 1-based sample index and count (the external wrench schedule
  // needs them).
  const GraspSampleCost& evaluate(const Grasp& grasp, const TrajSample& sample, int m, int M);

  const HandModel& hand() const { return hand_; }
  const ObjectModel& object() const { return obj_; }
  const Environment& environment() const { return env_; }
  const ExternalWrench& external_wrench() const { return w_ext_; }
  const CostWeights& weights() const { return weights_; }
  const WrenchParams& wrench_params() const { return wrench_params_; }
  const Eigen::VectorXd& q_home() const { return q_home_; }
  const IkParams& ik_params() const { return ik_params_; }

  std::size_t cache_size() const { return cache_.size(); }

 private:
  using Key = std::vector<long long>;
  Key make_key(const Grasp& grasp, const TrajSample& s, bool wext_on) const;

  const HandModel& hand_;
  const ObjectModel& obj_;
  const Environment& env_;
  Eigen::VectorXd q_home_;
  IkParams ik_params_;
  WrenchParams wrench_params_;
  CostWeights weights_;
  ExternalWrench w_ext_;
  std::map<Key, GraspSampleCost> cache_;
};

}  // namespace inhand
