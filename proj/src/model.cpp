#include "inhand/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inhand {

int HandModel::dof() const {
  int n = 0;
  for (const auto& f : fingers) n += static_cast<int>(f.joints.size());
  return n;
}

int HandModel::num_links() const {
  int n = 0;
  for (const auto& f : fingers) n += static_cast<int>(f.links.size());
  return n;
}

HandModel::LinkRef HandModel::link_ref(int global_link) const {
  int base = 0;
  for (int fi = 0; fi < static_cast<int>(fingers.size()); ++fi) {
    const int n = static_cast<int>(fingers[fi].links.size());
    if (global_link < base + n) return LinkRef{fi, global_link - base};
    base += n;
  }
  throw std::out_of_range("HandModel::link_ref: bad link id");
}

int HandModel::global_link(int finger, int index) const {
  int base = 0;
  for (int fi = 0; fi < finger; ++fi) base += static_cast<int>(fingers[fi].links.size());
  return base + index;
}

std::pair<int, int> HandModel::finger_joint_span(int finger) const {
  int base = 0;
  for (int fi = 0; fi < finger; ++fi) base += static_cast<int>(fingers[fi].joints.size());
  return {base, base + static_cast<int>(fingers[finger].joints.size())};
}

const Link& HandModel::link(int global_link) const {
  const LinkRef r = link_ref(global_link);
  return fingers[r.finger].links[r.index];
}

std::string HandModel::link_name(int global_link) const {
  const LinkRef r = link_ref(global_link);
  return fingers[r.finger].name + "/" + fingers[r.finger].links[r.index].name;
}

int HandModel::link_by_name(const std::string& name) const {
  for (int l = 0; l < num_links(); ++l) {
    if (link_name(l) == name || link(l).name == name) return l;
  }
  return -1;
}

const LinkContactPoint& HandModel::link_contact(int global_link, const std::string& id) const {
  const Link& l = link(global_link);
  if (l.contacts.empty()) {
    throw std::invalid_argument("link " + link_name(global_link) + " has no contact candidates");
  }
  if (id.empty()) return l.contacts.front();
  for (const auto& c : l.contacts) {
    if (c.id == id) return c;
  }
  throw std::invalid_argument("link " + link_name(global_link) + " has no contact point '" + id +
                              "'");
}

Eigen::VectorXd HandModel::q_min() const {
  Eigen::VectorXd out(dof());
  int i = 0;
  for (const auto& f : fingers) {
    for (const auto& j : f.joints) out(i++) = j.q_min;
  }
  return out;
}

Eigen::VectorXd HandModel::q_max() const {
  Eigen::VectorXd out(dof());
  int i = 0;
  for (const auto& f : fingers) {
    for (const auto& j : f.joints) out(i++) = j.q_max;
  }
  return out;
}

void HandModel::validate() const {
  if (fingers.empty()) throw std::invalid_argument("hand has no fingers");
  for (const auto& f : fingers) {
    if (f.joints.size() != f.links.size()) {
      throw std::invalid_argument("finger " + f.name + ": joints and links must pair up");
    }
    if (f.joints.empty()) throw std::invalid_argument("finger " + f.name + " has no joints");
    for (const auto& j : f.joints) {
      if (!(j.q_min < j.q_max)) {
        throw std::invalid_argument("joint " + j.name + ": q_min must be below q_max");
      }
      if (j.axis.norm() < 1e-9) {
        throw std::invalid_argument("joint " + j.name + ": zero axis");
      }
    }
  }
}

int ObjectModel::contact_index(const std::string& id) const {
  for (int i = 0; i < static_cast<int>(contacts.size()); ++i) {
    if (contacts[i].id == id) return i;
  }
  return -1;
}

void ObjectModel::validate() const {
  if (mass <= 0.0) throw std::invalid_argument("object mass must be positive");
  if ((inertia - inertia.transpose()).norm() > 1e-9) {
    throw std::invalid_argument("object inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(inertia);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("object inertia must be positive definite");
  }
  for (const auto& c : contacts) {
    if (std::abs(c.normal.norm() - 1.0) > 1e-6 || std::abs(c.tangent.norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("contact " + c.id + ": normal and tangent must be unit");
    }
    if (std::abs(c.normal.dot(c.tangent)) > 1e-6) {
      throw std::invalid_argument("contact " + c.id + ": normal and tangent must be orthogonal");
    }
  }
}

const ContactInfo* Grasp::find_link(int link) const {
  for (const auto& c : contacts) {
    if (c.link == link) return &c;
  }
  return nullptr;
}

std::vector<std::pair<int, int>> Grasp::key() const {
  std::vector<std::pair<int, int>> k;
  k.reserve(contacts.size());
  for (const auto& c : contacts) k.emplace_back(c.link, c.object_point);
  return k;
}

void Grasp::sort_contacts() {
  std::sort(contacts.begin(), contacts.end(),
            [](const ContactInfo& a, const ContactInfo& b) { return a.link < b.link; });
}

bool operator==(const Grasp& a, const Grasp& b) { return a.key() == b.key(); }
bool operator<(const Grasp& a, const Grasp& b) { return a.key() < b.key(); }

std::vector<Pose> forward_kinematics(const HandModel& hand, const Eigen::VectorXd& q) {
  if (q.size() != hand.dof()) {
    throw std::invalid_argument("forward_kinematics: expected " + std::to_string(hand.dof()) +
                                " joint values, got " + std::to_string(q.size()));
  }
  std::vector<Pose> out;
  out.reserve(hand.num_links());
  int qi = 0;
  for (const auto& f : hand.fingers) {
    Pose frame = hand.base_pose;
    for (size_t j = 0; j < f.joints.size(); ++j) {
      const Joint& joint = f.joints[j];
      frame = frame * joint.origin;
      frame.R = frame.R * rotation_about(joint.axis, q(qi++));
      out.push_back(frame);  // link j rigid with joint j
    }
  }
  return out;
}

Eigen::Vector3d contact_point_world(const HandModel&, const std::vector<Pose>& link_poses,
                                    int link, const Eigen::Vector3d& c_J) {
  return link_poses[link] * c_J;
}

Eigen::MatrixXd contact_jacobian(const HandModel& hand, const Eigen::VectorXd& q, int link,
                                 const Eigen::Vector3d& c_J) {
  return contact_jacobian(hand, forward_kinematics(hand, q), link, c_J);
}

Eigen::MatrixXd contact_jacobian(const HandModel& hand, const std::vector<Pose>& poses,
                                 int link, const Eigen::Vector3d& c_J) {
  const HandModel::LinkRef ref = hand.link_ref(link);
  const auto [jbegin, jend] = hand.finger_joint_span(ref.finger);
  const Eigen::Vector3d x = poses[link] * c_J;

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, hand.dof());
  const int chain_len = ref.index + 1;  // joints up to and including the link's joint
  for (int k = 0; k < chain_len; ++k) {
    const int gl = hand.global_link(ref.finger, k);
    const Joint& joint = hand.fingers[ref.finger].joints[k];
    // joint axis in world: the link pose already contains the joint rotation,
    // which leaves the axis itself invariant
    const Eigen::Vector3d axis_w = poses[gl].R * joint.axis.normalized();
    J.col(jbegin + k) = axis_w.cross(x - poses[gl].p);
  }
  (void)jend;
  return J;
}

std::vector<Primitive> hand_world_primitives(const HandModel& hand,
                                             const std::vector<Pose>& link_poses,
                                             bool with_palm) {
  std::vector<Primitive> out;
  if (with_palm) {
    for (const auto& p : hand.palm) out.push_back(transformed(p, hand.base_pose));
  }
  for (int l = 0; l < hand.num_links(); ++l) {
    for (const auto& p : hand.link(l).collision) out.push_back(transformed(p, link_poses[l]));
  }
  return out;
}

ContactInfo make_contact(const HandModel& hand, const ObjectModel& obj, int link,
                         int object_point, const std::string& link_point_id) {
  if (object_point < 0 || object_point >= static_cast<int>(obj.contacts.size())) {
    throw std::out_of_range("make_contact: bad object point index");
  }
  ContactInfo c;
  c.link = link;
  c.c_J = hand.link_contact(link, link_point_id).point;
  c.object_point = object_point;
  c.c_O = obj.contacts[object_point].point;
  return c;
}

std::vector<Grasp> enumerate_grasp_candidates(const HandModel& hand, const ObjectModel& obj,
                                              const PairingMap& pairing,
                                              const std::function<bool(const Grasp&)>& filter) {
  if (pairing.empty()) {
    throw std::invalid_argument("enumerate_grasp_candidates: empty pairing map");
  }
  for (const auto& [link, pts] : pairing) {
    if (link < 0 || link >= hand.num_links()) {
      throw std::invalid_argument("enumerate_grasp_candidates: bad link id in pairing");
    }
    for (int p : pts) {
      if (p < 0 || p >= static_cast<int>(obj.contacts.size())) {
        throw std::invalid_argument("enumerate_grasp_candidates: bad object point in pairing");
      }
    }
  }

  // Options per finger: no contact, or one (link, point) pair from the pairing.
  const int nf = static_cast<int>(hand.fingers.size());
  std::vector<std::vector<std::pair<int, int>>> options(nf);
  for (const auto& [link, pts] : pairing) {
    const int fi = hand.finger_of_link(link);
    for (int p : pts) options[fi].emplace_back(link, p);
  }
  for (auto& opts : options) std::sort(opts.begin(), opts.end());

  std::vector<Grasp> out;
  std::vector<int> choice(nf, -1);  // -1 = no contact, else option index
  const std::function<void(int)> recurse = [&](int fi) {
    if (fi == nf) {
      Grasp g;
      for (int i = 0; i < nf; ++i) {
        if (choice[i] >= 0) {
          const auto [link, pt] = options[i][choice[i]];
          g.contacts.push_back(make_contact(hand, obj, link, pt));
        }
      }
      if (g.size() < 2) return;  // singletons cannot hold the object
      g.sort_contacts();
      if (!filter || filter(g)) out.push_back(std::move(g));
      return;
    }
    choice[fi] = -1;
    recurse(fi + 1);
    for (int oi = 0; oi < static_cast<int>(options[fi].size()); ++oi) {
      choice[fi] = oi;
      recurse(fi + 1);
    }
    choice[fi] = -1;
  };
  recurse(0);

  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace inhand
