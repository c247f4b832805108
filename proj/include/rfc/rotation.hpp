#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

#include "rfc/error.hpp"

namespace rfc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// World up axis. The ground is the plane y = 0.
inline Vec3 up_axis() { return Vec3::UnitY(); }
inline Vec3 gravity_vector(double g = 9.81) { return Vec3(0.0, -g, 0.0); }

// Quaternion exponential of a rotation vector (axis * angle).
inline Quat quat_exp(const Vec3& phi) {
  const double angle = phi.norm();
  if (angle < 1e-14) {
    Quat q(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z());
    q.normalize();
    return q;
  }
  const Vec3 axis = phi / angle;
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return Quat(std::cos(half), s * axis.x(), s * axis.y(), s * axis.z());
}

// Rotation vector of a unit quaternion, angle in [0, pi].
inline Vec3 quat_log(const Quat& q_in) {
  Quat q = q_in;
  if (q.w() < 0.0) q.coeffs() *= -1.0;  // shortest arc
  const Vec3 v(q.x(), q.y(), q.z());
  const double sin_half = v.norm();
  if (sin_half < 1e-14) return 2.0 * v;
  const double angle = 2.0 * std::atan2(sin_half, q.w());
  return (angle / sin_half) * v;
}

// Rotation angle of the relative quaternion from b2 to b1, in [0, pi].
// The double cover is handled: q and -q give the same angle.
inline double quat_diff_angle(const Quat& b1, const Quat& b2) {
  const double n1 = b1.norm(), n2 = b2.norm();
  if (std::abs(n1 - 1.0) > 1e-6 || std::abs(n2 - 1.0) > 1e-6)
    throw ContractError("quat_diff_angle: inputs must be unit quaternions");
  const Quat rel = b2.conjugate() * b1;
  const Vec3 v(rel.x(), rel.y(), rel.z());
  return 2.0 * std::atan2(v.norm(), std::abs(rel.w()));
}

// Yaw (twist about the world up axis) component of a rotation.
// Swing-twist decomposition: q = swing * twist, twist about +y.
inline Quat heading_quat(const Quat& q) {
  Quat twist(q.w(), 0.0, q.y(), 0.0);
  const double n = twist.norm();
  if (n < 1e-12) return Quat::Identity();  // gimbal: no usable heading
  twist.coeffs() /= n;
  return twist;
}

inline double heading_angle(const Quat& q) {
  const Quat t = heading_quat(q);
  double a = 2.0 * std::atan2(t.y(), t.w());
  return a;
}

// Intrinsic rotation about a fixed local axis by an angle.
inline Quat axis_angle_quat(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

// Keeps q on the same hemisphere as ref (for sequence continuity).
inline Quat quat_align(const Quat& q, const Quat& ref) {
  Quat out = q;
  if (q.dot(ref) < 0.0) out.coeffs() *= -1.0;
  return out;
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), 0, v.x();
  return m;
}

}  // namespace rfc
