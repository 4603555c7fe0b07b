/**
 * @file geometry.hpp
 * @brief Rigid-body primitives shared by every other tetherplan module.
 *
 * Conventions (fixed once, used everywhere):
 *   - Rot3 is a column-vector rotation matrix: world = R * local.
 *   - Pose maps local coordinates to world: p_world = R * p_local + t.
 *   - Roll/pitch/yaw are extrinsic X-Y-Z: R = Rz(yaw) * Ry(pitch) * Rx(roll).
 *   - All angles are radians; degrees only appear in scene files and CLI flags.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tetherplan {

using Vec3 = Eigen::Vector3d;
using Rot3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ZeroVectorError : public Error {
public:
  ZeroVectorError() : Error("ZeroVector: vector norm below 1e-12") {}
};

inline constexpr double kMinNorm = 1e-12;

struct Pose {
  Rot3 rotation = Rot3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

inline Vec3 rotate(const Rot3& r, const Vec3& v) { return r * v; }

/// Angle in [0, pi] between two non-zero vectors.
inline double angle_between(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na >= kMinNorm) || !(nb >= kMinNorm)) throw ZeroVectorError();
  double c = a.dot(b) / (na * nb);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

inline Rot3 rot_x(double a) {
  Rot3 r;
  const double c = std::cos(a), s = std::sin(a);
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

inline Rot3 rot_y(double a) {
  Rot3 r;
  const double c = std::cos(a), s = std::sin(a);
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

inline Rot3 rot_z(double a) {
  Rot3 r;
  const double c = std::cos(a), s = std::sin(a);
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

inline Rot3 rpy_to_rot(double roll, double pitch, double yaw) {
  return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

/// Inverse of rpy_to_rot. Returns (roll, pitch, yaw); pitch in [-pi/2, pi/2].
/// Near the gimbal band (|pitch| = pi/2) yaw is set to zero.
inline Vec3 rot_to_rpy(const Rot3& r) {
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(sp);
  if (std::abs(sp) > 1.0 - 1e-12) {
    const double roll = std::atan2(-r(1, 2), r(1, 1));
    return {roll, pitch, 0.0};
  }
  return {std::atan2(r(2, 1), r(2, 2)), pitch, std::atan2(r(1, 0), r(0, 0))};
}

/// Rodrigues rotation about a unit axis.
inline Rot3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Log map: rotation vector (axis * angle) with angle in [0, pi].
inline Vec3 rotation_vector(const Rot3& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double angle = std::acos(c);
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (angle < 1e-7) return 0.5 * w;
  if (kPi - angle > 1e-6) return w * (angle / (2.0 * std::sin(angle)));
  // Near pi the skew part vanishes; recover the axis from the symmetric part.
  const Rot3 b = (r + Rot3::Identity()) * 0.5;
  int k = 0;
  b.diagonal().maxCoeff(&k);
  Vec3 axis = b.col(k) / std::sqrt(std::max(b(k, k), 1e-300));
  if (axis.dot(w) < 0.0) axis = -axis;
  return axis.normalized() * angle;
}

inline Pose compose(const Pose& p, const Pose& q) {
  return {p.rotation * q.rotation, p.rotation * q.translation + p.translation};
}

inline Pose inverse(const Pose& p) {
  const Rot3 rt = p.rotation.transpose();
  return {rt, -(rt * p.translation)};
}

inline Pose operator*(const Pose& p, const Pose& q) { return compose(p, q); }

inline Pose make_pose(const Vec3& xyz, const Vec3& rpy) {
  return {rpy_to_rot(rpy.x(), rpy.y(), rpy.z()), xyz};
}

inline double rotation_distance(const Rot3& a, const Rot3& b) {
  return rotation_vector(a.transpose() * b).norm();
}

inline bool is_orthonormal(const Rot3& r, double tol = 1e-9) {
  const Rot3 e = r.transpose() * r - Rot3::Identity();
  return e.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

/// Projects a nearly orthonormal matrix back onto SO(3).
inline Rot3 orthonormalize(const Rot3& r) {
  Eigen::JacobiSVD<Rot3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Rot3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Rot3 u = svd.matrixU();
    u.col(2) *= -1.0;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

inline bool poses_close(const Pose& a, const Pose& b, double pos_tol, double ori_tol) {
  return (a.translation - b.translation).norm() <= pos_tol &&
         rotation_distance(a.rotation, b.rotation) <= ori_tol;
}

}  // namespace tetherplan
