#pragma once

#include <Eigen/Dense>
#include <vector>

#include "inhand/controller.hpp"
#include "inhand/ik.hpp"
#include "inhand/model.hpp"

namespace inhand {

struct SimParams {
  double dt{1e-3};                // RK4 step
  double mu{1.0};                 // Coulomb friction coefficient
  double contact_stiffness{5e4};  // N/m
  double contact_damping{200.0};  // N s/m
  double friction_reg_vel{1e-3};  // m/s, tangential regularization velocity
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  double joint_inertia{1e-3};  // apparent inertia per joint (kg m^2)
  double joint_kd{2.0};        // joint-level damping of the PD layer
};

struct SimContact {
  int link{-1};  // -1 for object-environment contacts
  Eigen::Vector3d point{Eigen::Vector3d::Zero()};
  Eigen::Vector3d force{Eigen::Vector3d::Zero()};  // on the object, world
  double depth{0.0};
};

struct SimState {
  double t{0.0};
  Eigen::Vector3d p{Eigen::Vector3d::Zero()};   // object position
  Eigen::Vector4d quat{0.0, 0.0, 0.0, 1.0};     // object orientation, scalar-last
  Eigen::Vector3d v{Eigen::Vector3d::Zero()};   // world linear velocity
  Eigen::Vector3d w{Eigen::Vector3d::Zero()};   // world angular velocity
  Eigen::VectorXd q;                            // joint positions
  Eigen::VectorXd qd;                           // joint velocities

  std::vector<SimContact> contacts;  // refreshed by step()

  Pose object_pose() const {
    return Pose{p, quat_to_rotation<double>(quat)};
  }
};

// Rigid object under gravity, penalty point contacts (finger candidate
// points vs object primitives, object primitives vs the environment) with
// regularized Coulomb friction, and PD-with-gravity-compensation joints,
// integrated together by RK4. The external wrench (world) is applied to the
// object when ext_wrench_on is true. Deterministic; throws on NaN.
class Simulator {
 public:
  Simulator(const HandModel& hand, const ObjectModel& obj, const Environment& env,
            const SimParams& params, const Eigen::VectorXd& joint_kp);

  SimState make_state(const Pose& object_pose, const Eigen::VectorXd& q0) const;

  // Advance one step under the given joint reference positions.
  void step(SimState& state, const Eigen::VectorXd& q_ref,
            const Eigen::Vector3d& ext_force = Eigen::Vector3d::Zero(),
            const Eigen::Vector3d& ext_torque = Eigen::Vector3d::Zero()) const;

  // Per-link sensed force (applied by the link to the object) and center of
  // pressure; links without contact are inactive.
  std::vector<LinkSense> sense_contacts(const SimState& state) const;

  const SimParams& params() const { return params_; }

 private:
  Eigen::VectorXd pack(const SimState& s) const;
  void unpack(const Eigen::VectorXd& x, SimState& s) const;
  // time derivative of the packed state; optionally records contacts
  Eigen::VectorXd deriv(const Eigen::VectorXd& x, const Eigen::VectorXd& q_ref,
                        const Eigen::Vector3d& ext_force, const Eigen::Vector3d& ext_torque,
                        std::vector<SimContact>* contacts_out) const;

  const HandModel& hand_;
  const ObjectModel& obj_;
  Environment env_;
  SimParams params_;
  Eigen::VectorXd joint_kp_;
  int dof_;
};

}  // namespace inhand
