#include "inhand/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace inhand {

Primitive Primitive::sphere(const Eigen::Vector3d& center, double radius) {
  Primitive p;
  p.kind = Kind::Sphere;
  p.c = center;
  p.r = radius;
  return p;
}

Primitive Primitive::capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius) {
  Primitive p;
  p.kind = Kind::Capsule;
  p.p0 = a;
  p.p1 = b;
  p.r = radius;
  return p;
}

Primitive Primitive::box(const Pose& pose, const Eigen::Vector3d& half_extents) {
  Primitive p;
  p.kind = Kind::Box;
  p.pose = pose;
  p.half = half_extents;
  return p;
}

Primitive Primitive::half_space(const Eigen::Vector3d& normal, double offset) {
  Primitive p;
  p.kind = Kind::HalfSpace;
  p.n = normal.normalized();
  p.offset = offset;
  return p;
}

Primitive transformed(const Primitive& prim, const Pose& frame) {
  Primitive out = prim;
  switch (prim.kind) {
    case Primitive::Kind::Sphere:
      out.c = frame * prim.c;
      break;
    case Primitive::Kind::Capsule:
      out.p0 = frame * prim.p0;
      out.p1 = frame * prim.p1;
      break;
    case Primitive::Kind::Box:
      out.pose = frame * prim.pose;
      break;
    case Primitive::Kind::HalfSpace:
      out.n = frame.R * prim.n;
      out.offset = prim.offset + out.n.dot(frame.p);
      break;
  }
  return out;
}

namespace {

Eigen::Vector3d closest_on_segment(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                   const Eigen::Vector3d& x) {
  const Eigen::Vector3d d = b - a;
  const double dd = d.squaredNorm();
  if (dd < 1e-24) return a;
  const double t = std::clamp((x - a).dot(d) / dd, 0.0, 1.0);
  return a + t * d;
}

// Any unit vector perpendicular to u (deterministic).
Eigen::Vector3d any_perpendicular(const Eigen::Vector3d& u) {
  Eigen::Vector3d v = std::abs(u.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  return (v - v.dot(u) * u).normalized();
}

double point_box_local(const Eigen::Vector3d& local, const Eigen::Vector3d& half,
                       Eigen::Vector3d* normal_local) {
  const Eigen::Vector3d q = local.cwiseAbs() - half;
  if ((q.array() > 0.0).any()) {
    const Eigen::Vector3d qp = q.cwiseMax(0.0);
    const double dist = qp.norm();
    if (normal_local) {
      Eigen::Vector3d n = qp;
      for (int i = 0; i < 3; ++i) n(i) *= (local(i) < 0.0 ? -1.0 : 1.0);
      *normal_local = n / dist;
    }
    return dist;
  }
  int k = 0;
  const double depth = q.maxCoeff(&k);  // <= 0, closest face along axis k
  if (normal_local) {
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    n(k) = (local(k) < 0.0 ? -1.0 : 1.0);
    *normal_local = n;
  }
  return depth;
}

double point_box_distance(const Primitive& box, const Eigen::Vector3d& x,
                          Eigen::Vector3d* normal) {
  const Eigen::Vector3d local = box.pose.inverse() * x;
  Eigen::Vector3d nl;
  const double d = point_box_local(local, box.half, normal ? &nl : nullptr);
  if (normal) *normal = box.pose.R * nl;
  return d;
}

// Distance from a segment to a box: point-box distance is convex along the
// segment, so a ternary search over the parameter is exact to tolerance.
double segment_box_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const Primitive& box) {
  auto f = [&](double t) {
    return point_box_distance(box, a + t * (b - a), nullptr);
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::min({f(lo), f(0.0), f(1.0)});
}

double box_support(const Primitive& box, const Eigen::Vector3d& dir) {
  // max over box points of dir.dot(x)
  const Eigen::Vector3d dl = box.pose.R.transpose() * dir;
  return dir.dot(box.pose.p) + dl.cwiseAbs().dot(box.half);
}

// Separating-axis bound for two boxes: max separation over the 15 axes.
double box_box_distance(const Primitive& a, const Primitive& b) {
  std::vector<Eigen::Vector3d> axes;
  axes.reserve(15);
  for (int i = 0; i < 3; ++i) axes.push_back(a.pose.R.col(i));
  for (int i = 0; i < 3; ++i) axes.push_back(b.pose.R.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d c = a.pose.R.col(i).cross(b.pose.R.col(j));
      const double n = c.norm();
      if (n > 1e-12) axes.push_back(c / n);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& ax : axes) {
    const double sep1 = -box_support(b, -ax) - box_support(a, ax);
    const double sep2 = -box_support(a, -ax) - box_support(b, ax);
    best = std::max({best, sep1, sep2});
  }
  return best;
}

double half_space_support_gap(const Primitive& hs, const Primitive& other) {
  // distance of the other primitive above the half-space surface
  switch (other.kind) {
    case Primitive::Kind::Sphere:
      return hs.n.dot(other.c) - hs.offset - other.r;
    case Primitive::Kind::Capsule:
      return std::min(hs.n.dot(other.p0), hs.n.dot(other.p1)) - hs.offset - other.r;
    case Primitive::Kind::Box:
      return -box_support(other, -hs.n) - hs.offset;
    case Primitive::Kind::HalfSpace:
      throw std::invalid_argument("distance: half-space vs half-space is not supported");
  }
  return 0.0;
}

}  // namespace

double signed_distance(const Primitive& prim, const Eigen::Vector3d& point,
                       Eigen::Vector3d* normal) {
  switch (prim.kind) {
    case Primitive::Kind::Sphere: {
      const Eigen::Vector3d d = point - prim.c;
      const double n = d.norm();
      if (normal) *normal = n > 1e-12 ? Eigen::Vector3d(d / n) : Eigen::Vector3d::UnitZ();
      return n - prim.r;
    }
    case Primitive::Kind::Capsule: {
      const Eigen::Vector3d cp = closest_on_segment(prim.p0, prim.p1, point);
      const Eigen::Vector3d d = point - cp;
      const double n = d.norm();
      if (normal) {
        *normal = n > 1e-12 ? Eigen::Vector3d(d / n)
                            : any_perpendicular((prim.p1 - prim.p0).normalized());
      }
      return n - prim.r;
    }
    case Primitive::Kind::Box:
      return point_box_distance(prim, point, normal);
    case Primitive::Kind::HalfSpace:
      if (normal) *normal = prim.n;
      return prim.n.dot(point) - prim.offset;
  }
  return 0.0;
}

double segment_segment_distance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                                const Eigen::Vector3d& p2, const Eigen::Vector3d& q2) {
  // Ericson, Real-Time Collision Detection, 5.1.9.
  const Eigen::Vector3d d1 = q1 - p1;
  const Eigen::Vector3d d2 = q2 - p2;
  const Eigen::Vector3d r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  constexpr double kEps = 1e-24;
  if (a <= kEps && e <= kEps) {
    return r.norm();
  }
  if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > kEps) {
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      }
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

double distance(const Primitive& a, const Primitive& b) {
  using K = Primitive::Kind;
  if (a.kind == K::HalfSpace) return half_space_support_gap(a, b);
  if (b.kind == K::HalfSpace) return half_space_support_gap(b, a);
  // order pair so that a.kind <= b.kind (Sphere < Capsule < Box)
  if (static_cast<int>(a.kind) > static_cast<int>(b.kind)) return distance(b, a);

  if (a.kind == K::Sphere && b.kind == K::Sphere) {
    return (a.c - b.c).norm() - a.r - b.r;
  }
  if (a.kind == K::Sphere && b.kind == K::Capsule) {
    return (a.c - closest_on_segment(b.p0, b.p1, a.c)).norm() - a.r - b.r;
  }
  if (a.kind == K::Sphere && b.kind == K::Box) {
    return point_box_distance(b, a.c, nullptr) - a.r;
  }
  if (a.kind == K::Capsule && b.kind == K::Capsule) {
    return segment_segment_distance(a.p0, a.p1, b.p0, b.p1) - a.r - b.r;
  }
  if (a.kind == K::Capsule && b.kind == K::Box) {
    return segment_box_distance(a.p0, a.p1, b) - a.r;
  }
  return box_box_distance(a, b);
}

bool any_overlap(const std::vector<Primitive>& a, const std::vector<Primitive>& b,
                 double margin) {
  for (const auto& pa : a) {
    for (const auto& pb : b) {
      if (overlap(pa, pb, margin)) return true;
    }
  }
  return false;
}

}  // namespace inhand
