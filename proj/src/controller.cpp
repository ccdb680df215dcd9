#include "inhand/controller.hpp"

#include <cmath>
#include <stdexcept>

#include "inhand/ik.hpp"

namespace inhand {

void object_tracking(const Pose& ref, const Pose& measured, const ControllerGains& gains,
                     ObjectTrackingState& state, Eigen::Vector3d& dv_hat,
                     Eigen::Vector3d& dw_hat) {
  const Eigen::Vector3d dr = rotation_error<double>(measured.R, ref.R);
  dv_hat = gains.k_p1 * (ref.p - measured.p) - gains.k_d1 * state.v_hat;
  dw_hat = gains.k_p2 * dr - gains.k_d2 * state.w_hat;
  state.v_hat += dv_hat * gains.dt;
  state.w_hat += dw_hat * gains.dt;
}

Eigen::Vector3d force_tracking(const Eigen::Vector3d& f_star, const Eigen::Vector3d& f_meas,
                               const Eigen::MatrixXd& J_finger,
                               const Eigen::VectorXd& K_pj_finger,
                               const Eigen::Vector3d& v_hat, const Eigen::Vector3d& w_hat,
                               const Eigen::Vector3d& p_Ok, double dt) {
  if ((K_pj_finger.array() <= 0.0).any()) {
    throw std::invalid_argument("force_tracking: joint gains must be positive");
  }
  const Eigen::VectorXd dtau = J_finger.transpose() * (f_star - f_meas);
  const Eigen::VectorXd dq = dtau.cwiseQuotient(K_pj_finger);
  return J_finger * dq + dt * (v_hat + w_hat.cross(p_Ok));
}

Eigen::Vector3d slide_projection(const Eigen::Vector3d& dp, const Eigen::Vector3d& n) {
  return dp - n.dot(dp) * n;
}

const char* to_string(TransitionPhase phase) {
  switch (phase) {
    case TransitionPhase::Approach:
      return "approach";
    case TransitionPhase::ForceHold:
      return "force-hold";
    case TransitionPhase::Confirm:
      return "confirm";
    case TransitionPhase::Done:
      return "done";
    case TransitionPhase::Failed:
      return "failed";
  }
  return "?";
}

void transition_step(ContactTransition& tr, const TransitionSense& sense,
                     const TransitionThresholds& th, double dt) {
  if (tr.phase == TransitionPhase::Done || tr.phase == TransitionPhase::Failed) return;
  tr.total_time += dt;
  tr.phase_time += dt;

  auto advance = [&](TransitionPhase next) {
    tr.phase = next;
    tr.phase_time = 0.0;
    tr.confirm_timer = 0.0;
  };

  switch (tr.kind) {
    case TransitionKind::Add:
      if (tr.phase == TransitionPhase::Approach) {
        if (sense.force >= th.detect_force) advance(TransitionPhase::ForceHold);
      } else if (tr.phase == TransitionPhase::ForceHold) {
        if (sense.force >= th.confirm_force) advance(TransitionPhase::Confirm);
      } else if (tr.phase == TransitionPhase::Confirm) {
        if (sense.force >= th.confirm_force) {
          tr.confirm_timer += dt;
          if (tr.confirm_timer >= th.confirm_time) advance(TransitionPhase::Done);
        } else {
          tr.confirm_timer = 0.0;  // dropouts restart the window, phase stays
        }
      }
      break;
    case TransitionKind::Remove:
      // Approach = retract motion; Confirm = no-force window.
      if (tr.phase == TransitionPhase::Approach) {
        if (sense.force < th.detect_force) advance(TransitionPhase::Confirm);
      } else if (tr.phase == TransitionPhase::Confirm) {
        if (sense.force < th.detect_force) {
          tr.confirm_timer += dt;
          if (tr.confirm_timer >= th.release_time) advance(TransitionPhase::Done);
        } else {
          tr.confirm_timer = 0.0;
        }
      }
      break;
    case TransitionKind::Slide:
      if (tr.phase == TransitionPhase::Approach) {
        if (sense.slide_remaining <= th.slide_tol) advance(TransitionPhase::Confirm);
      } else if (tr.phase == TransitionPhase::Confirm) {
        // brief hold at the target to let forces settle
        tr.confirm_timer += dt;
        if (tr.confirm_timer >= th.confirm_time) advance(TransitionPhase::Done);
      }
      break;
  }

  if (tr.phase != TransitionPhase::Done && tr.total_time > th.timeout) {
    tr.phase = TransitionPhase::Failed;
  }
}

ManipulationController::ManipulationController(
    const HandModel& hand, const ObjectModel& obj, const ObjectTrajectory& traj,
    std::shared_ptr<const GraspPolicy> policy, const Grasp& start_grasp, const Pose& goal_pose,
    const ControllerGains& gains, const TransitionThresholds& thresholds,
    const WrenchParams& wrench_params, const ExternalWrench& w_ext,
    const Eigen::VectorXd& q_ref0, double preroll)
    : hand_(hand),
      obj_(obj),
      traj_(traj),
      policy_(std::move(policy)),
      goal_pose_(goal_pose),
      gains_(gains),
      thresholds_(thresholds),
      wrench_params_(wrench_params),
      w_ext_(w_ext),
      q_ref_(q_ref0),
      traj_clock_(-preroll),
      grasp_(start_grasp) {
  if (gains_.K_pj.size() != hand.dof()) {
    throw std::invalid_argument("ManipulationController: K_pj must have one gain per joint");
  }
}

const Eigen::VectorXd& ManipulationController::control_cycle(const ControlSnapshot& snap) {
  const double dt = gains_.dt;
  const double T = traj_.duration();
  const bool frozen = transition_ && transition_->kind == TransitionKind::Add &&
                      transition_->phase != TransitionPhase::Done &&
                      transition_->phase != TransitionPhase::Failed;
  if (!frozen) traj_clock_ = std::min(traj_clock_ + dt, T + 1e9);  // clock keeps post-plan time
  const double t_ref = std::clamp(traj_clock_, 0.0, T);
  const TrajSample ref = traj_.at(t_ref);

  telemetry_ = ControlTelemetry{};
  telemetry_.t = snap.t;
  telemetry_.traj_time = traj_clock_;
  telemetry_.ref_pose = ref.pose;
  telemetry_.sample_index = m_next_;
  if (transition_) telemetry_.transition = to_string(transition_->phase);

  // 1) object tracking
  Eigen::Vector3d dv_hat, dw_hat;
  object_tracking(ref.pose, snap.object_pose, gains_, track_, dv_hat, dw_hat);

  // 2) contact force optimization for the active grasp
  const int M = traj_.sample_count();
  const bool wext_on = w_ext_.active_at(m_next_ > M ? M : m_next_, M) ||
                       (!w_ext_.last_sample_only);
  const bool at_end = traj_clock_ >= T - 1e-9;
  const Eigen::Vector3d f_ext =
      (w_ext_.last_sample_only ? (at_end ? w_ext_.force : Eigen::Vector3d::Zero())
                               : w_ext_.force);
  const Eigen::Vector3d tau_ext =
      (w_ext_.last_sample_only ? (at_end ? w_ext_.torque : Eigen::Vector3d::Zero())
                               : w_ext_.torque);
  (void)wext_on;

  std::vector<Eigen::Vector3d> f_star(grasp_.size(), Eigen::Vector3d::Zero());
  if (!grasp_.empty()) {
    const Eigen::Vector3d f_E = obj_.mass * wrench_params_.gravity + f_ext;
    const WrenchTarget target =
        required_wrench(obj_, ref.pose.R, track_.w_hat, dv_hat, dw_hat, f_E, tau_ext);
    const ContactForceResult fr = optimize_contact_forces(
        contact_entries(obj_, grasp_, ref.pose.R), target, wrench_params_.w_t,
        wrench_params_.mu, wrench_params_.pyramid_sides);
    f_star = fr.forces;
  }

  // 3) per-finger displacement targets
  const auto link_poses_ref = forward_kinematics(hand_, q_ref_);
  std::vector<Eigen::Vector3d> targets;
  std::vector<Eigen::MatrixXd> jacobians;
  auto finger_gains = [&](int link) {
    const auto [jb, je] = hand_.finger_joint_span(hand_.finger_of_link(link));
    return std::pair<int, int>{jb, je - jb};
  };
  auto measured_force = [&](int link) -> Eigen::Vector3d {
    if (link < static_cast<int>(snap.link_forces.size()) && snap.link_forces[link].active) {
      return snap.link_forces[link].force;
    }
    return Eigen::Vector3d::Zero();
  };

  const int slide_link =
      (transition_ && transition_->kind == TransitionKind::Slide) ? transition_->target.link : -1;

  for (int k = 0; k < grasp_.size(); ++k) {
    const ContactInfo& c = grasp_.contacts[k];
    const Eigen::MatrixXd J = contact_jacobian(hand_, q_ref_, c.link, c.c_J);
    const auto [jb, nj] = finger_gains(c.link);
    const Eigen::MatrixXd Jf = J.middleCols(jb, nj);
    const Eigen::Vector3d p_Ok = ref.pose.R * c.c_O;
    const Eigen::Vector3d dp_ft =
        force_tracking(f_star[k], measured_force(c.link), Jf, gains_.K_pj.segment(jb, nj),
                       track_.v_hat, track_.w_hat, p_Ok, dt);

    Eigen::Vector3d dp = dp_ft;
    if (c.link == slide_link && transition_->phase == TransitionPhase::Approach) {
      // hybrid slide: position control tangentially toward the target point,
      // force control along the surface normal
      const Eigen::Vector3d n_w = (snap.object_pose.R * obj_.contacts[c.object_point].normal);
      const Eigen::Vector3d x_now =
          contact_point_world(hand_, link_poses_ref, c.link, c.c_J);
      const Eigen::Vector3d x_to =
          snap.object_pose * obj_.contacts[transition_->target.object_point].point;
      Eigen::Vector3d tangent_err = slide_projection(x_to - x_now, n_w);
      const double dist = tangent_err.norm();
      Eigen::Vector3d step = Eigen::Vector3d::Zero();
      if (dist > 1e-9) step = tangent_err / dist * std::min(thresholds_.slide_speed * dt, dist);
      dp = step + n_w * n_w.dot(dp_ft);
    }
    targets.push_back(dp);
    jacobians.push_back(J);
  }

  // 4) transition-specific motion for fingers not carried by the grasp
  if (transition_ && transition_->phase != TransitionPhase::Done &&
      transition_->phase != TransitionPhase::Failed) {
    ContactTransition& tr = *transition_;
    const ContactInfo& c = tr.target;
    TransitionSense sense;
    sense.force = measured_force(c.link).norm();

    if (tr.kind == TransitionKind::Add) {
      const Eigen::MatrixXd J = contact_jacobian(hand_, q_ref_, c.link, c.c_J);
      const Eigen::Vector3d x_now =
          contact_point_world(hand_, link_poses_ref, c.link, c.c_J);
      const Eigen::Vector3d x_target = snap.object_pose * c.c_O;
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      if (tr.phase == TransitionPhase::Approach) {
        const Eigen::Vector3d err = x_target - x_now;
        const double dist = err.norm();
        if (dist > 1e-9) dp = err / dist * std::min(thresholds_.approach_speed * dt, dist);
      } else {
        // hold the small establishment force
        const Eigen::Vector3d n_w = snap.object_pose.R * obj_.contacts[c.object_point].normal;
        const auto [jb, nj] = finger_gains(c.link);
        dp = force_tracking(thresholds_.touch_force * n_w, measured_force(c.link),
                            J.middleCols(jb, nj), gains_.K_pj.segment(jb, nj), track_.v_hat,
                            track_.w_hat, ref.pose.R * c.c_O, dt);
      }
      targets.push_back(dp);
      jacobians.push_back(J);
    } else if (tr.kind == TransitionKind::Remove) {
      const Eigen::MatrixXd J = contact_jacobian(hand_, q_ref_, c.link, c.c_J);
      const Eigen::Vector3d n_w = snap.object_pose.R * obj_.contacts[c.object_point].normal;
      // retract along the outward surface direction (opposite the push normal)
      targets.push_back(-n_w * thresholds_.approach_speed * dt);
      jacobians.push_back(J);
    } else if (tr.kind == TransitionKind::Slide) {
      const ContactInfo* cur = grasp_.find_link(c.link);
      if (cur != nullptr) {
        const Eigen::Vector3d n_w = snap.object_pose.R * obj_.contacts[cur->object_point].normal;
        const Eigen::Vector3d x_now =
            contact_point_world(hand_, link_poses_ref, c.link, cur->c_J);
        const Eigen::Vector3d x_to = snap.object_pose * obj_.contacts[c.object_point].point;
        sense.slide_remaining = slide_projection(x_to - x_now, n_w).norm();
      }
    }
    transition_step(tr, sense, thresholds_, dt);
    if (tr.phase == TransitionPhase::Failed) transition_failed_ = true;
    telemetry_.transition = to_string(tr.phase);
  }

  // 5) one IK step folds all displacement targets into the joint reference
  if (!targets.empty()) {
    const Eigen::VectorXd dq =
        ik_step(q_ref_, targets, jacobians, 1.0, hand_.q_min(), hand_.q_max());
    q_ref_ += dq;
  }

  for (int k = 0; k < grasp_.size(); ++k) {
    telemetry_.desired_forces.emplace_back(grasp_.contacts[k].link, f_star[k]);
  }
  return q_ref_;
}

void ManipulationController::manager_update(const ControlSnapshot& snap) {
  const int M = traj_.sample_count();
  if (transition_) {
    if (transition_->phase == TransitionPhase::Done) {
      ContactTransition tr = *transition_;
      transition_.reset();
      if (tr.kind == TransitionKind::Add) {
        grasp_.contacts.push_back(tr.target);
        grasp_.sort_contacts();
      } else if (tr.kind == TransitionKind::Slide) {
        for (auto& c : grasp_.contacts) {
          if (c.link == tr.target.link) {
            c = tr.target;  // sticking at the new point
          }
        }
      }
      // Remove: the contact left the grasp at dispatch; Done just confirms.
    } else if (transition_->phase == TransitionPhase::Failed) {
      // Abandon the change; on adds the reference clock resumes automatically.
      if (transition_->kind == TransitionKind::Slide) {
        for (auto& c : grasp_.contacts) {
          if (c.link == transition_->target.link) c.mode = ContactMode::Sticking;
        }
      }
      transition_.reset();
    } else {
      return;  // transition still running; no new dispatch
    }
  }

  if (m_next_ > M) return;
  const double T = traj_.duration();
  const double t_sample = T * (m_next_ - 1) / std::max(1, M - 1);
  if (traj_clock_ + 1e-9 < t_sample) return;

  SeqState s;
  s.q = snap.q;
  s.ref_pose = traj_.samples[m_next_ - 1].pose;
  s.goal_pose = goal_pose_;
  s.m = m_next_;
  s.M = M;
  s.grasp = grasp_;
  s.w_ext = w_ext_;
  const SeqAction action = policy_->decide(s);
  dispatch(action, snap);
  ++m_next_;
}

void ManipulationController::dispatch(const SeqAction& action, const ControlSnapshot& snap) {
  (void)snap;
  switch (action.kind) {
    case ActionKind::NoChange:
      return;
    case ActionKind::Add: {
      if (grasp_.find_link(action.link) != nullptr) return;  // invalid: ignore
      ContactTransition tr;
      tr.kind = TransitionKind::Add;
      tr.action = action;
      tr.target = make_contact(hand_, obj_, action.link, action.object_point);
      transition_ = tr;
      return;
    }
    case ActionKind::Remove: {
      const ContactInfo* cur = grasp_.find_link(action.link);
      if (cur == nullptr) return;
      ContactTransition tr;
      tr.kind = TransitionKind::Remove;
      tr.action = action;
      tr.target = *cur;
      // the wrench QP stops counting on this contact immediately
      std::erase_if(grasp_.contacts,
                    [&](const ContactInfo& c) { return c.link == action.link; });
      transition_ = tr;
      return;
    }
    case ActionKind::SlideTo: {
      ContactInfo* cur = nullptr;
      for (auto& c : grasp_.contacts) {
        if (c.link == action.link) cur = &c;
      }
      if (cur == nullptr || cur->object_point == action.object_point) return;
      ContactTransition tr;
      tr.kind = TransitionKind::Slide;
      tr.action = action;
      tr.prev_object_point = cur->object_point;
      tr.target = make_contact(hand_, obj_, action.link, action.object_point);
      tr.target.c_J = cur->c_J;
      transition_ = tr;
      // mark the live contact as sliding along the surface direction
      const Eigen::Vector3d from = obj_.contacts[cur->object_point].point;
      const Eigen::Vector3d to = obj_.contacts[action.object_point].point;
      const Eigen::Vector3d n = obj_.contacts[cur->object_point].normal;
      Eigen::Vector3d dir = slide_projection(to - from, n);
      if (dir.norm() > 1e-9) {
        cur->mode = ContactMode::Sliding;
        cur->slide_dir = dir.normalized();
      }
      return;
    }
  }
}

}  // namespace inhand
