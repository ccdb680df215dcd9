#pragma once

#include <Eigen/Dense>
#include <vector>

#include "inhand/geometry.hpp"

namespace inhand {

// Convex collision primitive. Spheres, capsules, boxes and a half-space are
// enough for desk-scale tools; meshes are out of scope.
struct Primitive {
  enum class Kind { Sphere, Capsule, Box, HalfSpace };
  Kind kind{Kind::Sphere};

  // Sphere: center c, radius r.
  // Capsule: segment p0-p1, radius r.
  // Box: pose (frame of the box center) and half extents.
  // HalfSpace: solid region {x : n.dot(x) <= offset}; n unit.
  Eigen::Vector3d c{Eigen::Vector3d::Zero()};
  Eigen::Vector3d p0{Eigen::Vector3d::Zero()};
  Eigen::Vector3d p1{Eigen::Vector3d::Zero()};
  double r{0.0};
  Pose pose;
  Eigen::Vector3d half{Eigen::Vector3d::Zero()};
  Eigen::Vector3d n{Eigen::Vector3d::UnitZ()};
  double offset{0.0};

  static Primitive sphere(const Eigen::Vector3d& center, double radius);
  static Primitive capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius);
  static Primitive box(const Pose& pose, const Eigen::Vector3d& half_extents);
  static Primitive half_space(const Eigen::Vector3d& normal, double offset);
};

// Primitive re-expressed in the world frame given the frame it lives in.
Primitive transformed(const Primitive& prim, const Pose& frame);

// Signed distance from a point to the primitive surface (negative inside) and
// the outward normal at the closest surface point.
double signed_distance(const Primitive& prim, const Eigen::Vector3d& point,
                       Eigen::Vector3d* normal = nullptr);

// Separation distance between two primitives; <= 0 means touching or
// overlapping. Box-box pairs use a SAT bound (exact as an overlap test, a
// lower bound on the distance when separated).
double distance(const Primitive& a, const Primitive& b);

inline bool overlap(const Primitive& a, const Primitive& b, double margin = 0.0) {
  return distance(a, b) <= margin;
}

bool any_overlap(const std::vector<Primitive>& a, const std::vector<Primitive>& b,
                 double margin = 0.0);

// Distance between segments [p1,q1] and [p2,q2].
double segment_segment_distance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                                const Eigen::Vector3d& p2, const Eigen::Vector3d& q2);

}  // namespace inhand
