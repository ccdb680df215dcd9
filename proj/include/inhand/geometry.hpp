#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace inhand {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Quaternion = Eigen::Quaternion<Scalar>;

/// Rigid pose: position p and rotation R (world_from_body).
template <typename Scalar>
struct PoseT {
  Vector3<Scalar> p{Vector3<Scalar>::Zero()};
  Matrix3<Scalar> R{Matrix3<Scalar>::Identity()};

  static PoseT Identity() { return PoseT{}; }

  // Composition: this * other (other expressed in this frame).
  PoseT operator*(const PoseT& other) const {
    return PoseT{p + R * other.p, R * other.R};
  }
  Vector3<Scalar> operator*(const Vector3<Scalar>& x) const { return p + R * x; }

  PoseT inverse() const {
    return PoseT{-(R.transpose() * p), R.transpose()};
  }
};

template <typename Scalar>
struct TwistT {
  Vector3<Scalar> v{Vector3<Scalar>::Zero()};
  Vector3<Scalar> w{Vector3<Scalar>::Zero()};
};

using Pose = PoseT<double>;
using Twist = TwistT<double>;

template <typename Derived>
Matrix3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  Matrix3<S> m;
  m << S(0), -a(2), a(1), a(2), S(0), -a(0), -a(1), a(0), S(0);
  return m;
}

template <typename Derived>
Matrix3<typename Derived::Scalar> rotation_about(const Eigen::MatrixBase<Derived>& axis,
                                                 typename Derived::Scalar angle) {
  return Eigen::AngleAxis<typename Derived::Scalar>(angle, axis.normalized()).toRotationMatrix();
}

// Axis-angle decomposition with angle in [0, pi]. At angle pi the axis sign is
// ambiguous; the axis is chosen so its largest-magnitude component is positive.
// At angle 0 the axis defaults to +x.
template <typename Scalar>
void axis_angle(const Matrix3<Scalar>& R, Vector3<Scalar>& axis, Scalar& angle) {
  const Vector3<Scalar> vee(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const Scalar sin2 = vee.norm() / Scalar(2);
  const Scalar cos2 = (R.trace() - Scalar(1)) / Scalar(2);
  angle = std::atan2(sin2, cos2);
  if (sin2 > Scalar(1e-7)) {
    axis = vee / (Scalar(2) * sin2);
    return;
  }
  if (cos2 > Scalar(0)) {  // angle ~ 0: axis arbitrary
    axis = Vector3<Scalar>::UnitX();
    return;
  }
  // angle ~ pi: extract axis from the symmetric part, R + I = 2 a a^T (at pi).
  const Matrix3<Scalar> B = (R + Matrix3<Scalar>::Identity()) * Scalar(0.5);
  int k = 0;
  B.diagonal().maxCoeff(&k);
  axis = B.col(k) / std::sqrt(B(k, k));
  axis.normalize();
  int imax = 0;
  axis.cwiseAbs().maxCoeff(&imax);
  if (axis(imax) < Scalar(0)) axis = -axis;
}

// Orientation error a*sin(theta), where (a, theta) is the axis-angle form of the
// relative rotation R_ref * R_cur^T. Zero when the rotations coincide.
template <typename Scalar>
Vector3<Scalar> rotation_error(const Matrix3<Scalar>& R_cur, const Matrix3<Scalar>& R_ref) {
  const Matrix3<Scalar> rel = R_ref * R_cur.transpose();
  Vector3<Scalar> axis;
  Scalar angle;
  axis_angle(rel, axis, angle);
  return axis * std::sin(angle);
}

// Normalize a quaternion stored scalar-last (x, y, z, w), fixing the sign so the
// scalar part is >= 0 (at w == 0 the first nonzero of x,y,z is made positive).
template <typename Scalar>
Vector4<Scalar> quat_normalize(const Vector4<Scalar>& q) {
  const Scalar n = q.norm();
  if (n <= Scalar(1e-12)) {
    throw std::invalid_argument("quat_normalize: near-zero quaternion");
  }
  Vector4<Scalar> u = q / n;
  Scalar lead = u(3);
  if (lead == Scalar(0)) {
    for (int i = 0; i < 3; ++i) {
      if (u(i) != Scalar(0)) {
        lead = u(i);
        break;
      }
    }
  }
  if (lead < Scalar(0)) u = -u;
  return u;
}

// Scalar-last component vector of the quaternion for R.
template <typename Scalar>
Vector4<Scalar> rotation_to_quat(const Matrix3<Scalar>& R) {
  Quaternion<Scalar> q(R);
  Vector4<Scalar> out;
  out << q.x(), q.y(), q.z(), q.w();
  return quat_normalize(out);
}

template <typename Scalar>
Matrix3<Scalar> quat_to_rotation(const Vector4<Scalar>& q) {
  return Quaternion<Scalar>(q(3), q(0), q(1), q(2)).normalized().toRotationMatrix();
}

// Angle of the relative rotation between two rotations, in [0, pi].
template <typename Scalar>
Scalar rotation_angle(const Matrix3<Scalar>& Ra, const Matrix3<Scalar>& Rb) {
  Vector3<Scalar> axis;
  Scalar angle;
  const Matrix3<Scalar> rel = Rb * Ra.transpose();
  axis_angle(rel, axis, angle);
  return angle;
}

// Renormalize R to the nearest rotation (polar-like correction via quaternion).
template <typename Scalar>
Matrix3<Scalar> orthonormalize(const Matrix3<Scalar>& R) {
  return Quaternion<Scalar>(R).normalized().toRotationMatrix();
}

inline Pose slerp_pose(const Pose& a, const Pose& b, double s) {
  Eigen::Quaterniond qa(a.R), qb(b.R);
  if (qa.dot(qb) < 0.0) qb.coeffs() = -qb.coeffs();
  Pose out;
  out.p = (1.0 - s) * a.p + s * b.p;
  out.R = qa.slerp(s, qb).toRotationMatrix();
  return out;
}

}  // namespace inhand
