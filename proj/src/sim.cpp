#include "inhand/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace inhand {

Simulator::Simulator(const HandModel& hand, const ObjectModel& obj, const Environment& env,
                     const SimParams& params, const Eigen::VectorXd& joint_kp)
    : hand_(hand), obj_(obj), env_(env), params_(params), joint_kp_(joint_kp),
      dof_(hand.dof()) {
  if (joint_kp_.size() != dof_) {
    throw std::invalid_argument("Simulator: one joint gain per joint required");
  }
}

SimState Simulator::make_state(const Pose& object_pose, const Eigen::VectorXd& q0) const {
  SimState s;
  s.p = object_pose.p;
  s.quat = rotation_to_quat<double>(object_pose.R);
  s.q = q0;
  s.qd = Eigen::VectorXd::Zero(dof_);
  return s;
}

Eigen::VectorXd Simulator::pack(const SimState& s) const {
  Eigen::VectorXd x(13 + 2 * dof_);
  x.segment<3>(0) = s.p;
  x.segment<4>(3) = s.quat;
  x.segment<3>(7) = s.v;
  x.segment<3>(10) = s.w;
  x.segment(13, dof_) = s.q;
  x.segment(13 + dof_, dof_) = s.qd;
  return x;
}

void Simulator::unpack(const Eigen::VectorXd& x, SimState& s) const {
  s.p = x.segment<3>(0);
  s.quat = x.segment<4>(3).normalized();
  s.v = x.segment<3>(7);
  s.w = x.segment<3>(10);
  s.q = x.segment(13, dof_);
  s.qd = x.segment(13 + dof_, dof_);
}

namespace {

// Penalty force on the penetrating body: normal spring-damper clamped to
// pushing, plus regularized Coulomb drag bounded by mu * normal.
Eigen::Vector3d penalty_force(const Eigen::Vector3d& n_out, double depth, double depth_rate,
                              const Eigen::Vector3d& v_rel, const SimParams& prm) {
  const double fn = std::max(0.0, prm.contact_stiffness * depth + prm.contact_damping * depth_rate);
  if (fn <= 0.0) return Eigen::Vector3d::Zero();
  const Eigen::Vector3d vt = v_rel - n_out.dot(v_rel) * n_out;
  const double vt_norm = vt.norm();
  Eigen::Vector3d ft = Eigen::Vector3d::Zero();
  if (vt_norm > 1e-15) {
    ft = -prm.mu * fn * vt / std::max(vt_norm, prm.friction_reg_vel);
  }
  return n_out * fn + ft;
}

}  // namespace

Eigen::VectorXd Simulator::deriv(const Eigen::VectorXd& x, const Eigen::VectorXd& q_ref,
                                 const Eigen::Vector3d& ext_force,
                                 const Eigen::Vector3d& ext_torque,
                                 std::vector<SimContact>* contacts_out) const {
  SimState s;
  s.q = Eigen::VectorXd::Zero(dof_);
  s.qd = Eigen::VectorXd::Zero(dof_);
  unpack(x, s);
  const Pose obj_pose = s.object_pose();
  const Eigen::Matrix3d R = obj_pose.R;

  Eigen::Vector3d f_obj = obj_.mass * params_.gravity + ext_force;
  Eigen::Vector3d tau_obj = ext_torque;
  Eigen::VectorXd tau_q = Eigen::VectorXd::Zero(dof_);

  std::vector<Primitive> obj_world;
  obj_world.reserve(obj_.primitives.size());
  for (const auto& prim : obj_.primitives) obj_world.push_back(transformed(prim, obj_pose));

  const auto link_poses = forward_kinematics(hand_, s.q);

  auto object_point_velocity = [&](const Eigen::Vector3d& xw) {
    return s.v + s.w.cross(xw - s.p);
  };

  // finger candidate points vs object primitives
  for (int l = 0; l < hand_.num_links(); ++l) {
    const Link& link = hand_.link(l);
    if (link.contacts.empty()) continue;
    for (const auto& cp : link.contacts) {
      const Eigen::Vector3d xw = link_poses[l] * cp.point;
      double best_sd = std::numeric_limits<double>::infinity();
      Eigen::Vector3d n_out = Eigen::Vector3d::UnitZ();
      for (const auto& prim : obj_world) {
        Eigen::Vector3d n;
        const double sd = signed_distance(prim, xw, &n);
        if (sd < best_sd) {
          best_sd = sd;
          n_out = n;
        }
      }
      if (best_sd >= 0.0) continue;
      const double depth = -best_sd;
      // finger point velocity via the contact Jacobian
      const Eigen::MatrixXd J = contact_jacobian(hand_, link_poses, l, cp.point);
      const Eigen::Vector3d v_pt = J * s.qd;
      const Eigen::Vector3d v_rel = v_pt - object_point_velocity(xw);
      const double depth_rate = -n_out.dot(v_rel);
      const Eigen::Vector3d f_on_finger = penalty_force(n_out, depth, depth_rate, v_rel, params_);
      if (f_on_finger.isZero(0.0)) continue;
      // reaction on the object
      f_obj -= f_on_finger;
      tau_obj += (xw - s.p).cross(-f_on_finger);
      tau_q += J.transpose() * f_on_finger;
      if (contacts_out) {
        contacts_out->push_back({l, xw, -f_on_finger, depth});
      }
    }
  }

  // object primitives vs environment statics (sampled support points)
  for (const auto& prim : obj_world) {
    std::vector<Eigen::Vector3d> points;
    switch (prim.kind) {
      case Primitive::Kind::Sphere:
        points.push_back(prim.c);
        break;
      case Primitive::Kind::Capsule:
        points.push_back(prim.p0);
        points.push_back(prim.p1);
        break;
      case Primitive::Kind::Box:
        for (int cx = -1; cx <= 1; cx += 2) {
          for (int cy = -1; cy <= 1; cy += 2) {
            for (int cz = -1; cz <= 1; cz += 2) {
              points.push_back(prim.pose * Eigen::Vector3d(cx * prim.half.x(),
                                                           cy * prim.half.y(),
                                                           cz * prim.half.z()));
            }
          }
        }
        break;
      case Primitive::Kind::HalfSpace:
        break;
    }
    const double pad = (prim.kind == Primitive::Kind::Sphere ||
                        prim.kind == Primitive::Kind::Capsule)
                           ? prim.r
                           : 0.0;
    for (const auto& sp : env_.statics) {
      for (const auto& pt : points) {
        Eigen::Vector3d n;
        const double sd = signed_distance(sp, pt, &n) - pad;
        if (sd >= 0.0) continue;
        const Eigen::Vector3d surf_pt = pt - n * pad;  // deepest object point
        const Eigen::Vector3d v_rel = object_point_velocity(surf_pt);
        const double depth_rate = -n.dot(v_rel);
        const Eigen::Vector3d f = penalty_force(n, -sd, depth_rate, v_rel, params_);
        if (f.isZero(0.0)) continue;
        f_obj += f;
        tau_obj += (surf_pt - s.p).cross(f);
        if (contacts_out) contacts_out->push_back({-1, surf_pt, f, -sd});
      }
    }
  }

  // object dynamics
  const Eigen::Matrix3d I_w = R * obj_.inertia * R.transpose();
  const Eigen::Vector3d dv = f_obj / obj_.mass;
  const Eigen::Vector3d dw = I_w.ldlt().solve(tau_obj - s.w.cross(I_w * s.w));

  // quaternion derivative, scalar-last storage
  const Eigen::Quaterniond Q(s.quat(3), s.quat(0), s.quat(1), s.quat(2));
  const Eigen::Quaterniond Wq(0.0, s.w.x(), s.w.y(), s.w.z());
  const Eigen::Quaterniond Qd(0.5 * (Wq * Q).coeffs());

  // joint dynamics: PD toward the reference (gravity on the links is assumed
  // compensated) plus contact reaction torques
  Eigen::VectorXd qdd(dof_);
  for (int i = 0; i < dof_; ++i) {
    const double tau =
        joint_kp_(i) * (q_ref(i) - s.q(i)) - params_.joint_kd * s.qd(i) + tau_q(i);
    qdd(i) = tau / params_.joint_inertia;
  }

  Eigen::VectorXd dx(13 + 2 * dof_);
  dx.segment<3>(0) = s.v;
  dx.segment<4>(3) = Qd.coeffs();  // (x, y, z, w)
  dx.segment<3>(7) = dv;
  dx.segment<3>(10) = dw;
  dx.segment(13, dof_) = s.qd;
  dx.segment(13 + dof_, dof_) = qdd;
  return dx;
}

void Simulator::step(SimState& state, const Eigen::VectorXd& q_ref,
                     const Eigen::Vector3d& ext_force, const Eigen::Vector3d& ext_torque) const {
  if (q_ref.size() != dof_) throw std::invalid_argument("Simulator::step: bad q_ref size");
  const double h = params_.dt;
  const Eigen::VectorXd x0 = pack(state);

  const Eigen::VectorXd k1 = deriv(x0, q_ref, ext_force, ext_torque, nullptr);
  const Eigen::VectorXd k2 = deriv(x0 + 0.5 * h * k1, q_ref, ext_force, ext_torque, nullptr);
  const Eigen::VectorXd k3 = deriv(x0 + 0.5 * h * k2, q_ref, ext_force, ext_torque, nullptr);
  const Eigen::VectorXd k4 = deriv(x0 + h * k3, q_ref, ext_force, ext_torque, nullptr);
  const Eigen::VectorXd x1 = x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  if (!x1.allFinite()) {
    throw std::runtime_error("Simulator::step: state diverged (NaN/inf) at t=" +
                             std::to_string(state.t));
  }
  unpack(x1, state);
  state.t += h;

  // refresh the contact report at the new state
  state.contacts.clear();
  deriv(pack(state), q_ref, ext_force, ext_torque, &state.contacts);
}

std::vector<LinkSense> Simulator::sense_contacts(const SimState& state) const {
  std::vector<LinkSense> out(hand_.num_links());
  std::vector<double> weight(hand_.num_links(), 0.0);
  for (const auto& c : state.contacts) {
    if (c.link < 0) continue;
    LinkSense& ls = out[c.link];
    ls.active = true;
    ls.force += c.force;
    const double wgt = c.force.norm();
    ls.cop += wgt * c.point;
    weight[c.link] += wgt;
  }
  for (int l = 0; l < hand_.num_links(); ++l) {
    if (out[l].active && weight[l] > 1e-12) out[l].cop /= weight[l];
  }
  return out;
}

}  // namespace inhand
