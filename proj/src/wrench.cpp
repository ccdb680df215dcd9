#include "inhand/wrench.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "inhand/qp.hpp"

namespace inhand {

WrenchTarget required_wrench(const ObjectModel& obj, const Eigen::Matrix3d& R_O,
                             const Eigen::Vector3d& w_O, const Eigen::Vector3d& dv_O,
                             const Eigen::Vector3d& dw_O, const Eigen::Vector3d& f_E,
                             const Eigen::Vector3d& tau_E) {
  const Eigen::Matrix3d I_w = R_O * obj.inertia * R_O.transpose();
  WrenchTarget t;
  t.f = obj.mass * dv_O - f_E;
  t.tau = I_w * dw_O + w_O.cross(I_w * w_O) - tau_E;
  return t;
}

FrictionPyramid friction_pyramid(const Eigen::Vector3d& n, const Eigen::Vector3d& t1, double mu,
                                 int L) {
  if (std::abs(n.norm() - 1.0) > 1e-9 || std::abs(t1.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("friction_pyramid: n and t1 must be unit vectors");
  }
  if (std::abs(n.dot(t1)) > 1e-9) {
    throw std::invalid_argument("friction_pyramid: n and t1 must be orthogonal");
  }
  if (mu <= 0.0) throw std::invalid_argument("friction_pyramid: mu must be positive");
  if (L < 3) throw std::invalid_argument("friction_pyramid: need at least 3 sides");

  const Eigen::Vector3d t2 = t1.cross(n);
  FrictionPyramid pyr;
  pyr.mu = mu;
  pyr.sides = L;
  pyr.faces.reserve(L);
  for (int l = 1; l <= L; ++l) {
    const double th = 2.0 * std::numbers::pi * l / L;
    pyr.faces.push_back(std::cos(th) * t1 + std::sin(th) * t2 - mu * n);
  }
  return pyr;
}

bool inside_pyramid(const FrictionPyramid& pyr, const Eigen::Vector3d& f, double slack) {
  for (const auto& c : pyr.faces) {
    if (c.dot(f) > slack) return false;
  }
  return true;
}

std::vector<ContactForceEntry> contact_entries(const ObjectModel& obj, const Grasp& grasp,
                                               const Eigen::Matrix3d& R_Om) {
  std::vector<ContactForceEntry> out;
  out.reserve(grasp.contacts.size());
  for (const auto& c : grasp.contacts) {
    const ObjectContactPoint& pt = obj.contacts.at(c.object_point);
    ContactForceEntry e;
    e.p = R_Om * pt.point;
    e.n = R_Om * pt.normal;
    e.t1 = R_Om * pt.tangent;
    e.sliding = (c.mode == ContactMode::Sliding);
    if (e.sliding) {
      if (c.slide_dir.norm() < 1e-9) {
        throw std::invalid_argument("sliding contact without a slide direction");
      }
      e.slide_dir = (R_Om * c.slide_dir).normalized();
    }
    out.push_back(e);
  }
  return out;
}

ContactForceResult optimize_contact_forces(const std::vector<ContactForceEntry>& contacts,
                                           const WrenchTarget& target, double w_t, double mu,
                                           int pyramid_sides) {
  if (contacts.empty()) {
    throw std::invalid_argument("optimize_contact_forces: empty grasp");
  }
  const int K = static_cast<int>(contacts.size());
  const double sw = std::sqrt(w_t);

  // Variable layout: 3 per sticking contact, 1 (edge magnitude) per slider.
  std::vector<int> offset(K);
  int nv = 0;
  for (int k = 0; k < K; ++k) {
    offset[k] = nv;
    nv += contacts[k].sliding ? 1 : 3;
  }

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(6, nv);
  Eigen::VectorXd y(6);
  y.head<3>() = target.f;
  y.tail<3>() = sw * target.tau;

  std::vector<FrictionPyramid> pyramids;
  int nc = 0;
  for (int k = 0; k < K; ++k) {
    if (contacts[k].sliding) {
      const Eigen::Vector3d edge = contacts[k].n + mu * contacts[k].slide_dir;
      W.block<3, 1>(0, offset[k]) = edge;
      W.block<3, 1>(3, offset[k]) = sw * contacts[k].p.cross(edge);
      pyramids.emplace_back();
      nc += 1;
    } else {
      W.block<3, 3>(0, offset[k]).setIdentity();
      W.block<3, 3>(3, offset[k]) = sw * skew(contacts[k].p);
      pyramids.push_back(friction_pyramid(contacts[k].n, contacts[k].t1, mu, pyramid_sides));
      nc += pyramid_sides;
    }
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nc, nv);
  int row = 0;
  for (int k = 0; k < K; ++k) {
    if (contacts[k].sliding) {
      A(row++, offset[k]) = 1.0;  // edge magnitude >= 0
    } else {
      for (const auto& face : pyramids[k].faces) {
        A.block<1, 3>(row++, offset[k]) = -face.transpose();  // c . f <= 0
      }
    }
  }

  QpResult qp = solve_lsi(W, y, A, Eigen::VectorXd::Zero(nc));
  if (!qp.success) {
    throw std::runtime_error("optimize_contact_forces: QP failed (" + qp.message +
                             "), K=" + std::to_string(K) + ", nv=" + std::to_string(nv));
  }

  ContactForceResult res;
  res.forces.reserve(K);
  for (int k = 0; k < K; ++k) {
    if (contacts[k].sliding) {
      const double a = qp.x(offset[k]);
      res.forces.push_back(a * (contacts[k].n + mu * contacts[k].slide_dir));
    } else {
      res.forces.push_back(qp.x.segment<3>(offset[k]));
    }
  }
  res.metrics.w_t = w_t;
  res.metrics.e_star = qp.objective;
  double fsq = 0.0;
  for (const auto& f : res.forces) fsq += f.squaredNorm();
  res.metrics.f_star = fsq;
  res.metrics.f_hat_total = target.f.squaredNorm() + w_t * target.tau.squaredNorm();
  return res;
}

ContactForceResult grasp_metrics(const ObjectModel& obj, const Grasp& grasp, const Pose& pose,
                                 const Eigen::Vector3d& w_O, const Eigen::Vector3d& dv_O,
                                 const Eigen::Vector3d& dw_O, const Eigen::Vector3d& f_ext,
                                 const Eigen::Vector3d& tau_ext, const WrenchParams& params) {
  const Eigen::Vector3d f_E = obj.mass * params.gravity + f_ext;
  const WrenchTarget target = required_wrench(obj, pose.R, w_O, dv_O, dw_O, f_E, tau_ext);
  return optimize_contact_forces(contact_entries(obj, grasp, pose.R), target, params.w_t,
                                 params.mu, params.pyramid_sides);
}

}  // namespace inhand
