#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "inhand/collision.hpp"
#include "inhand/geometry.hpp"

namespace inhand {

// ----------------------------------------------------------------------------
// Hand description: serial-chain fingers on a fixed base, revolute joints,
// one rigid link per joint. Contact candidate points live on links.
// ----------------------------------------------------------------------------

struct LinkContactPoint {
  std::string id;
  Eigen::Vector3d point{Eigen::Vector3d::Zero()};  // link frame
};

struct Joint {
  std::string name;
  Pose origin;  // joint frame in parent link frame (finger origin for the first joint)
  Eigen::Vector3d axis{Eigen::Vector3d::UnitZ()};  // rotation axis, joint frame
  double q_min{-3.14};
  double q_max{3.14};
};

struct Link {
  std::string name;
  std::vector<Primitive> collision;         // link frame
  std::vector<LinkContactPoint> contacts;   // candidate contact points, link frame
};

struct Finger {
  std::string name;
  std::vector<Joint> joints;  // serial; joints[i] moves links[i]
  std::vector<Link> links;
};

struct HandModel {
  std::string name;
  Pose base_pose;                // world
  std::vector<Primitive> palm;   // base frame
  std::vector<Finger> fingers;

  struct LinkRef {
    int finger;
    int index;  // within finger
  };

  int dof() const;
  int num_links() const;
  LinkRef link_ref(int global_link) const;
  int global_link(int finger, int index) const;
  int finger_of_link(int global_link) const { return link_ref(global_link).finger; }
  // Global joint index range [begin, end) driving the given finger.
  std::pair<int, int> finger_joint_span(int finger) const;
  const Link& link(int global_link) const;
  std::string link_name(int global_link) const;
  int link_by_name(const std::string& name) const;  // -1 if absent
  const LinkContactPoint& link_contact(int global_link, const std::string& id) const;

  Eigen::VectorXd q_min() const;
  Eigen::VectorXd q_max() const;

  void validate() const;  // throws std::invalid_argument on bad invariants
};

// ----------------------------------------------------------------------------
// Object description.
// ----------------------------------------------------------------------------

struct ObjectContactPoint {
  std::string id;
  Eigen::Vector3d point{Eigen::Vector3d::Zero()};    // object frame
  // Direction a finger pushes along at this point (unit, pointing into the
  // object, i.e. the negated outward surface normal).
  Eigen::Vector3d normal{Eigen::Vector3d::UnitZ()};
  Eigen::Vector3d tangent{Eigen::Vector3d::UnitX()};  // unit, orthogonal to normal
};

struct ObjectModel {
  std::string name;
  double mass{1.0};
  Eigen::Matrix3d inertia{Eigen::Matrix3d::Identity()};  // body frame
  std::vector<ObjectContactPoint> contacts;
  std::vector<Primitive> primitives;  // body frame

  int contact_index(const std::string& id) const;  // -1 if absent
  void validate() const;
};

// ----------------------------------------------------------------------------
// Contact formalism.
// ----------------------------------------------------------------------------

enum class ContactMode { Sticking, Sliding };

// A finger-link/object contact pair: link, point in link frame, point in
// object frame (one of the object's candidates).
struct ContactInfo {
  int link{-1};                                   // global link id
  Eigen::Vector3d c_J{Eigen::Vector3d::Zero()};   // link frame
  Eigen::Vector3d c_O{Eigen::Vector3d::Zero()};   // object frame
  int object_point{-1};                           // index into ObjectModel::contacts
  ContactMode mode{ContactMode::Sticking};
  Eigen::Vector3d slide_dir{Eigen::Vector3d::Zero()};  // desired tangent, object frame
};

struct Grasp {
  std::vector<ContactInfo> contacts;  // sorted by link id, at most one per link

  bool empty() const { return contacts.empty(); }
  int size() const { return static_cast<int>(contacts.size()); }
  const ContactInfo* find_link(int link) const;
  // Canonical (link, object_point) key for ordering and identity.
  std::vector<std::pair<int, int>> key() const;
  void sort_contacts();
};

bool operator==(const Grasp& a, const Grasp& b);
bool operator<(const Grasp& a, const Grasp& b);

// ----------------------------------------------------------------------------
// Kinematics.
// ----------------------------------------------------------------------------

// World pose of every link (global link order). Throws on dimension mismatch.
std::vector<Pose> forward_kinematics(const HandModel& hand, const Eigen::VectorXd& q);

// World position of a contact point on a link.
Eigen::Vector3d contact_point_world(const HandModel& hand, const std::vector<Pose>& link_poses,
                                    int link, const Eigen::Vector3d& c_J);

// 3 x dof Jacobian of the world position of contact point c_J on the given
// link; columns of joints off the supporting chain are zero.
Eigen::MatrixXd contact_jacobian(const HandModel& hand, const Eigen::VectorXd& q, int link,
                                 const Eigen::Vector3d& c_J);
Eigen::MatrixXd contact_jacobian(const HandModel& hand, const std::vector<Pose>& link_poses,
                                 int link, const Eigen::Vector3d& c_J);

// Hand collision primitives in world frame at configuration q; palm included
// when with_palm is true.
std::vector<Primitive> hand_world_primitives(const HandModel& hand,
                                             const std::vector<Pose>& link_poses,
                                             bool with_palm = true);

// ----------------------------------------------------------------------------
// Grasp candidate enumeration.
// ----------------------------------------------------------------------------

// link id -> compatible object contact point indices
using PairingMap = std::map<int, std::vector<int>>;

// All grasps with >= 2 contacts, at most one contact per finger, built from
// the pairing map, in deterministic lexicographic order. The optional filter
// keeps a candidate when it returns true (static feasibility check supplied
// by the caller). Throws when the pairing map is empty; returns an empty set
// when no candidate survives.
std::vector<Grasp> enumerate_grasp_candidates(
    const HandModel& hand, const ObjectModel& obj, const PairingMap& pairing,
    const std::function<bool(const Grasp&)>& filter = {});

// Contact for a (link, object point) pair using the link's candidate point.
// The link contact id defaults to the first candidate on the link.
ContactInfo make_contact(const HandModel& hand, const ObjectModel& obj, int link,
                         int object_point, const std::string& link_point_id = "");

}  // namespace inhand
