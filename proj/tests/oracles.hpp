// Independent reference computations for the tests. Nothing in here calls the
// library kernel it is meant to check.

#pragma once

#include "tetherplan/tetherplan.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

using tetherplan::JointConfig;
using tetherplan::Pose;
using tetherplan::Rot3;
using tetherplan::Vec3;

// ---------------------------------------------------------------------------
// Quaternions, written out by hand (w, x, y, z).

struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static Quat about(const Vec3& axis, double angle) {
    const Vec3 u = axis / std::sqrt(axis.x() * axis.x() + axis.y() * axis.y() + axis.z() * axis.z());
    const double s = std::sin(0.5 * angle);
    return {std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
  }

  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  Quat conj() const { return {w, -x, -y, -z}; }

  // q v q*
  Vec3 rotate(const Vec3& v) const {
    const Quat p{0.0, v.x(), v.y(), v.z()};
    const Quat r = (*this) * p * conj();
    return {r.x, r.y, r.z};
  }

  Rot3 matrix() const {
    Rot3 m;
    m.col(0) = rotate(Vec3::UnitX());
    m.col(1) = rotate(Vec3::UnitY());
    m.col(2) = rotate(Vec3::UnitZ());
    return m;
  }
};

// Extrinsic X, then Y, then Z.
inline Quat from_rpy(double roll, double pitch, double yaw) {
  return Quat::about(Vec3::UnitZ(), yaw) * Quat::about(Vec3::UnitY(), pitch) * Quat::about(Vec3::UnitX(), roll);
}

// Angle between two directions via atan2(|a x b|, a.b): no acos, no clamp.
inline double angle(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

// ---------------------------------------------------------------------------
// Forward kinematics as a product of 4x4 homogeneous matrices.

inline Eigen::Matrix4d homogeneous(const Rot3& r, const Vec3& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

inline Eigen::Matrix4d fk_matrix(const tetherplan::ArmModel& arm, const JointConfig& q) {
  Eigen::Matrix4d t = homogeneous(arm.base_pose.rotation, arm.base_pose.translation);
  for (int i = 0; i < tetherplan::kArmDof; ++i) {
    const auto& j = arm.joints[i];
    t = t * homogeneous(Rot3::Identity(), j.origin) *
        homogeneous(Eigen::AngleAxisd(q[i], j.axis).toRotationMatrix(), Vec3::Zero());
  }
  t = t * homogeneous(arm.last_joint_to_flange.rotation, arm.last_joint_to_flange.translation);
  t = t * homogeneous(arm.flange_to_tcp.rotation, arm.flange_to_tcp.translation);
  return t;
}

// ---------------------------------------------------------------------------
// Central finite differences.

// Column i: (dp/dq_i, omega_i). The angular part comes from the small
// relative rotation R(q+h) R(q-h)^T, read off through Eigen's angle-axis.
inline tetherplan::Jacobian fd_jacobian(const tetherplan::ArmModel& arm, const JointConfig& q, double h = 1e-6) {
  tetherplan::Jacobian jac;
  for (int i = 0; i < tetherplan::kArmDof; ++i) {
    JointConfig qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Eigen::Matrix4d tp = fk_matrix(arm, qp);
    const Eigen::Matrix4d tm = fk_matrix(arm, qm);
    jac.block<3, 1>(0, i) = (tp.topRightCorner<3, 1>() - tm.topRightCorner<3, 1>()) / (2.0 * h);
    const Eigen::AngleAxisd aa(Rot3(tp.topLeftCorner<3, 3>() * tm.topLeftCorner<3, 3>().transpose()));
    jac.block<3, 1>(3, i) = aa.axis() * aa.angle() / (2.0 * h);
  }
  return jac;
}

// Virtual work: tau_i = F . dp/dq_i for a point rigidly attached to the TCP.
inline JointConfig fd_torques(const tetherplan::ArmModel& arm, const JointConfig& q, const Vec3& point_world,
                              const Vec3& force, double h = 1e-6) {
  const Eigen::Matrix4d t0 = fk_matrix(arm, q);
  const Eigen::Vector4d local = t0.inverse() * point_world.homogeneous();
  JointConfig tau;
  for (int i = 0; i < tetherplan::kArmDof; ++i) {
    JointConfig qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Vec3 pp = (fk_matrix(arm, qp) * local).head<3>();
    const Vec3 pm = (fk_matrix(arm, qm) * local).head<3>();
    tau[i] = force.dot((pp - pm) / (2.0 * h));
  }
  return tau;
}

// ---------------------------------------------------------------------------
// Segment distance by sampling plus refinement.
//
// |P(s) - Q(t)| is convex in (s, t), so after a coarse grid the minimum is
// refined by nested ternary search, which converges for convex functions.

inline double segment_distance(const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2, int grid = 64) {
  auto f = [&](double s, double t) { return ((p1 + s * (p2 - p1)) - (q1 + t * (q2 - q1))).norm(); };
  double best = f(0.0, 0.0);
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) best = std::min(best, f(double(i) / grid, double(j) / grid));

  auto ternary = [](const std::function<double(double)>& g) {
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 100; ++k) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (g(m1) < g(m2)) hi = m2;
      else lo = m1;
    }
    return g(0.5 * (lo + hi));
  };
  const double refined = ternary([&](double s) { return ternary([&](double t) { return f(s, t); }); });
  return std::min(best, refined);
}

// ---------------------------------------------------------------------------
// Random inputs.

inline Rot3 random_rotation(tetherplan::Rng& rng) {
  // Uniform unit quaternion (Shoemake).
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const Quat q{b * std::cos(2 * M_PI * u3), a * std::sin(2 * M_PI * u2), a * std::cos(2 * M_PI * u2),
               b * std::sin(2 * M_PI * u3)};
  return q.matrix();
}

inline Vec3 random_vec(tetherplan::Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline Pose random_pose(tetherplan::Rng& rng) { return {random_rotation(rng), random_vec(rng, -1.0, 1.0)}; }

inline JointConfig random_config(tetherplan::Rng& rng, double lo = -M_PI, double hi = M_PI) {
  JointConfig q;
  for (int i = 0; i < tetherplan::kArmDof; ++i) q[i] = rng.uniform(lo, hi);
  return q;
}

// Configurations whose TCP poses make up the "in-workspace" IK targets:
// elbow (q3) and wrist (q5) kept at least 0.3 rad away from their
// singular straight positions, every other joint uniform in [-pi, pi].
inline JointConfig workspace_config(tetherplan::Rng& rng) {
  JointConfig q = random_config(rng);
  auto away = [&](double lo, double hi) {
    const double v = rng.uniform(lo, hi);
    return rng.uniform() < 0.5 ? -v : v;
  };
  q[2] = away(0.3, 2.6);
  q[4] = away(0.3, M_PI - 0.3);
  return q;
}

}  // namespace oracle
