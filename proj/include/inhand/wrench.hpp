#pragma once

#include <Eigen/Dense>
#include <vector>

#include "inhand/model.hpp"

namespace inhand {

// Force/torque the contacts must apply to the object, world frame.
struct WrenchTarget {
  Eigen::Vector3d f{Eigen::Vector3d::Zero()};
  Eigen::Vector3d tau{Eigen::Vector3d::Zero()};
};

// Linearized friction cone: L face normals c_l with feasible forces
// satisfying c_l . f <= 0. Built around the pushing direction n.
struct FrictionPyramid {
  std::vector<Eigen::Vector3d> faces;
  double mu{1.0};
  int sides{12};
};

struct GraspMetrics {
  double e_star{0.0};       // residual wrench cost at the optimum
  double f_star{0.0};       // sum of squared optimal contact forces
  double f_hat_total{0.0};  // ||f_hat||^2 + w_t ||tau_hat||^2
  double w_t{1.0};
};

struct ContactForceResult {
  std::vector<Eigen::Vector3d> forces;  // per contact, world frame
  GraspMetrics metrics;
};

// Newton-Euler total wrench needed to realize the accelerations, with the
// inertia rotated to world by R_O and applied external wrench subtracted:
//   f_hat = M dv - f_E,  tau_hat = I_w dw + w x I_w w - tau_E.
WrenchTarget required_wrench(const ObjectModel& obj, const Eigen::Matrix3d& R_O,
                             const Eigen::Vector3d& w_O, const Eigen::Vector3d& dv_O,
                             const Eigen::Vector3d& dw_O, const Eigen::Vector3d& f_E,
                             const Eigen::Vector3d& tau_E);

// Face normals c_l = (t1 t2 n) (cos th_l, sin th_l, -mu)^T, th_l = 2 pi l / L,
// t2 = t1 x n. Throws unless n, t1 are unit and orthogonal, mu > 0, L >= 3.
FrictionPyramid friction_pyramid(const Eigen::Vector3d& n, const Eigen::Vector3d& t1, double mu,
                                 int L);

bool inside_pyramid(const FrictionPyramid& pyr, const Eigen::Vector3d& f, double slack = 0.0);

// World-frame geometry of one contact in the force QP.
struct ContactForceEntry {
  Eigen::Vector3d p;   // moment arm R_Om c_O, world
  Eigen::Vector3d n;   // pushing direction, world, unit
  Eigen::Vector3d t1;  // tangent, world, unit
  bool sliding{false};
  Eigen::Vector3d slide_dir{Eigen::Vector3d::Zero()};  // unit tangent, world
};

// Contact-force QP: minimize
//   Z_f = ||f_hat - sum f_k||^2 + w_t ||tau_hat - sum p_k x f_k||^2
// with sticking contacts inside their pyramids and sliding contacts pinned to
// the friction-cone edge f_k = a (n + mu d), a >= 0, along the commanded
// slide direction d. Throws on an empty contact set or solver failure.
ContactForceResult optimize_contact_forces(const std::vector<ContactForceEntry>& contacts,
                                           const WrenchTarget& target, double w_t, double mu,
                                           int pyramid_sides);

// Convenience: build the per-contact world geometry for a grasp at object
// rotation R_Om from the object's candidate data.
std::vector<ContactForceEntry> contact_entries(const ObjectModel& obj, const Grasp& grasp,
                                               const Eigen::Matrix3d& R_Om);

struct WrenchParams {
  double w_t{1.0};
  double mu{1.0};
  int pyramid_sides{12};
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
};

// Metrics for using a grasp at one trajectory sample: required wrench from
// the sampled kinematics (gravity folded into the external force), then the
// contact-force QP.
ContactForceResult grasp_metrics(const ObjectModel& obj, const Grasp& grasp, const Pose& pose,
                                 const Eigen::Vector3d& w_O, const Eigen::Vector3d& dv_O,
                                 const Eigen::Vector3d& dw_O, const Eigen::Vector3d& f_ext,
                                 const Eigen::Vector3d& tau_ext, const WrenchParams& params);

}  // namespace inhand
