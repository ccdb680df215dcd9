#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "inhand/sequencer.hpp"
#include "inhand/traj.hpp"
#include "inhand/wrench.hpp"

namespace inhand {

struct ControllerGains {
  double k_p1{100.0};  // object position tracking
  double k_d1{20.0};
  double k_p2{100.0};  // object orientation tracking
  double k_d2{20.0};
  Eigen::VectorXd K_pj;  // per-joint proportional gains (admittance + sim PD)
  double dt{0.01};       // control period (100 Hz)
};

// Internal velocity state of the object tracker: the damping terms integrate
// the desired accelerations instead of differentiating measurements.
struct ObjectTrackingState {
  Eigen::Vector3d v_hat{Eigen::Vector3d::Zero()};
  Eigen::Vector3d w_hat{Eigen::Vector3d::Zero()};
};

// Desired object accelerations from pose error and the integrated velocity
// state; updates the state by explicit Euler after computing them.
void object_tracking(const Pose& ref, const Pose& measured, const ControllerGains& gains,
                     ObjectTrackingState& state, Eigen::Vector3d& dv_hat,
                     Eigen::Vector3d& dw_hat);

// Admittance-style contact displacement for one finger: joint offset
// K_pj^-1 J^T (f* - f) mapped back through the Jacobian, plus the contact
// displacement due to the commanded object motion.
Eigen::Vector3d force_tracking(const Eigen::Vector3d& f_star, const Eigen::Vector3d& f_meas,
                               const Eigen::MatrixXd& J_finger,
                               const Eigen::VectorXd& K_pj_finger,
                               const Eigen::Vector3d& v_hat, const Eigen::Vector3d& w_hat,
                               const Eigen::Vector3d& p_Ok, double dt);

// Remove the normal component: dp - n (n . dp).
Eigen::Vector3d slide_projection(const Eigen::Vector3d& dp, const Eigen::Vector3d& n);

struct TransitionThresholds {
  double touch_force{0.1};     // N, held while establishing a contact
  double confirm_force{0.05};  // N
  double confirm_time{0.1};    // s
  double release_time{1.0};    // s
  double timeout{5.0};         // s without phase progress -> failed
  double approach_speed{0.05};  // m/s
  double slide_speed{0.03};     // m/s
  double slide_tol{0.004};      // m, tangential arrival tolerance
  double detect_force{0.01};    // N, first-touch detection
};

enum class TransitionKind { Add, Slide, Remove };
enum class TransitionPhase { Approach, ForceHold, Confirm, Done, Failed };

struct ContactTransition {
  TransitionKind kind{TransitionKind::Add};
  SeqAction action;
  ContactInfo target;    // contact being added / slid to / removed
  int prev_object_point{-1};  // slide origin
  TransitionPhase phase{TransitionPhase::Approach};
  double phase_time{0.0};
  double total_time{0.0};
  double confirm_timer{0.0};
};

// Sensor view a transition needs: force magnitude on the transitioning link
// and, for slides, the remaining tangential distance to the target point.
struct TransitionSense {
  double force{0.0};
  double slide_remaining{0.0};
};

const char* to_string(TransitionPhase phase);

// Advance the add/slide/remove state machine by one control period. Phases
// only move forward; a transition that makes no progress within the timeout
// fails.
void transition_step(ContactTransition& tr, const TransitionSense& sense,
                     const TransitionThresholds& th, double dt);

// Sensed world state handed to the controller each cycle.
struct LinkSense {
  Eigen::Vector3d force{Eigen::Vector3d::Zero()};  // force the link applies to the object
  Eigen::Vector3d cop{Eigen::Vector3d::Zero()};
  bool active{false};
};

struct ControlSnapshot {
  double t{0.0};
  Eigen::VectorXd q;
  Pose object_pose;
  std::vector<LinkSense> link_forces;  // indexed by global link
};

// Per-cycle record for telemetry.
struct ControlTelemetry {
  double t{0.0};
  double traj_time{0.0};
  Pose ref_pose;
  std::vector<std::pair<int, Eigen::Vector3d>> desired_forces;  // (link, f*)
  std::string transition;
  int sample_index{1};
};

// Closed-loop executive: object tracking -> contact force QP -> per-finger
// force tracking -> one IK step, with the grasp sequence manager running at
// its own period and dispatching contact transitions.
class ManipulationController {
 public:
  ManipulationController(const HandModel& hand, const ObjectModel& obj,
                         const ObjectTrajectory& traj, std::shared_ptr<const GraspPolicy> policy,
                         const Grasp& start_grasp, const Pose& goal_pose,
                         const ControllerGains& gains, const TransitionThresholds& thresholds,
                         const WrenchParams& wrench_params, const ExternalWrench& w_ext,
                         const Eigen::VectorXd& q_ref0, double preroll = 0.0);

  // 100 Hz: returns the new joint reference vector.
  const Eigen::VectorXd& control_cycle(const ControlSnapshot& snap);
  // 10 Hz: transition bookkeeping and plan dispatch.
  void manager_update(const ControlSnapshot& snap);

  const Grasp& grasp() const { return grasp_; }
  const std::optional<ContactTransition>& transition() const { return transition_; }
  const Eigen::VectorXd& joint_reference() const { return q_ref_; }
  double trajectory_time() const { return traj_clock_; }
  bool transition_failed() const { return transition_failed_; }
  int next_sample() const { return m_next_; }
  const ControlTelemetry& telemetry() const { return telemetry_; }
  const ObjectTrackingState& tracking_state() const { return track_; }

 private:
  void dispatch(const SeqAction& action, const ControlSnapshot& snap);

  const HandModel& hand_;
  const ObjectModel& obj_;
  const ObjectTrajectory& traj_;
  std::shared_ptr<const GraspPolicy> policy_;
  Pose goal_pose_;
  ControllerGains gains_;
  TransitionThresholds thresholds_;
  WrenchParams wrench_params_;
  ExternalWrench w_ext_;

  Eigen::VectorXd q_ref_;
  ObjectTrackingState track_;
  double traj_clock_{0.0};
  int m_next_{1};
  Grasp grasp_;
  std::optional<ContactTransition> transition_;
  bool transition_failed_{false};
  ControlTelemetry telemetry_;
};

}  // namespace inhand
