#pragma once

#include <Eigen/Dense>
#include <vector>

#include "inhand/model.hpp"

namespace inhand {

// Static world geometry (floor plus any fixtures).
struct Environment {
  std::vector<Primitive> statics;

  static Environment floor_at(double z = 0.0) {
    Environment env;
    env.statics.push_back(Primitive::half_space(Eigen::Vector3d::UnitZ(), z));
    return env;
  }
};

struct IkParams {
  double gain{1.0};            // k_IK, scales the per-iteration joint-motion window
  double d_threshold{1e-8};    // total squared error for convergence (m^2)
  int max_iterations{100};
  // Per-iteration cap on each contact displacement target (m). Keeps the
  // Gauss-Newton step inside the linearization's region of validity so the
  // error-increase termination does not fire from distant starts.
  double step_max{0.05};
  // A link penetrating the environment deeper than this stops the iteration.
  double env_penetration{1e-6};
};

enum class IkTermination { Threshold, ErrorIncrease, EnvironmentContact, IterationCap };

struct IkResult {
  Eigen::VectorXd q_star;
  double d_star{0.0};                         // sum of squared contact errors at q_star
  std::vector<Eigen::Vector3d> contact_errors;  // residual per contact at q_star
  IkTermination termination{IkTermination::IterationCap};
  int iterations{0};
};

// One Gauss-Newton-style step: minimize sum_k ||J_k dq - dp_k||^2 subject to
// (1/gain)(q_min - q) <= dq <= (1/gain)(q_max - q). The box is always
// feasible (dq = 0), so the QP cannot fail for valid inputs.
Eigen::VectorXd ik_step(const Eigen::VectorXd& q,
                        const std::vector<Eigen::Vector3d>& targets,
                        const std::vector<Eigen::MatrixXd>& jacobians,
                        double gain, const Eigen::VectorXd& q_min,
                        const Eigen::VectorXd& q_max);

// Iterative IK driving every grasp contact point on the hand to its mate on
// the object at the given pose. Stops on the error threshold, on an error
// increase, on link-environment penetration, or at the iteration cap, and
// returns the best accepted iterate.
IkResult solve_ik(const HandModel& hand, const Eigen::VectorXd& q0, const Pose& object_pose,
                  const Grasp& grasp, const Environment& env, const IkParams& params = {});

// Largest squared per-contact error of a result (the grasp's max IK error).
double max_ik_error(const IkResult& result);

// Contact position residuals at configuration q: (object-side point) minus
// (hand-side point), world frame.
std::vector<Eigen::Vector3d> contact_residuals(const HandModel& hand,
                                               const std::vector<Pose>& link_poses,
                                               const Pose& object_pose, const Grasp& grasp);

}  // namespace inhand
