/**
 * @file robot_model.hpp
 * @brief Serial-chain kinematics for a dual-arm robot with two 6-DOF arms.
 *
 * Each joint is described URDF-style: a fixed translation from the previous
 * joint frame (no fixed rotation) followed by a revolute rotation about a
 * unit axis expressed in the joint frame. With all joints at zero every
 * joint frame is aligned with the arm base.
 */

#pragma once

#include "tetherplan/geometry.hpp"
#include "tetherplan/random.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace tetherplan {

inline constexpr int kArmDof = 6;

using JointConfig = Eigen::Matrix<double, kArmDof, 1>;
using Jacobian = Eigen::Matrix<double, 6, kArmDof>;

enum class ArmId : int { Left = 0, Right = 1 };

inline constexpr ArmId other_arm(ArmId a) { return a == ArmId::Left ? ArmId::Right : ArmId::Left; }
inline constexpr const char* arm_name(ArmId a) { return a == ArmId::Left ? "left" : "right"; }
inline constexpr char arm_letter(ArmId a) { return a == ArmId::Left ? 'L' : 'R'; }

class ModelError : public Error {
public:
  using Error::Error;
};

struct RevoluteJoint {
  Vec3 axis = Vec3::UnitZ();     // unit, joint frame
  Vec3 origin = Vec3::Zero();    // offset from the previous joint frame (m)
  double lower = -kPi;
  double upper = kPi;
};

struct ArmModel {
  Pose base_pose;
  std::array<RevoluteJoint, kArmDof> joints{};
  Pose last_joint_to_flange;
  Pose flange_to_tcp;

  bool within_limits(const JointConfig& q, double slack = 0.0) const {
    for (int i = 0; i < kArmDof; ++i) {
      if (q[i] < joints[i].lower - slack || q[i] > joints[i].upper + slack) return false;
    }
    return true;
  }

  JointConfig clamp(const JointConfig& q) const {
    JointConfig out = q;
    for (int i = 0; i < kArmDof; ++i) out[i] = std::clamp(q[i], joints[i].lower, joints[i].upper);
    return out;
  }
};

inline void validate(const ArmModel& arm) {
  if (!is_orthonormal(arm.base_pose.rotation)) throw ModelError("arm base rotation is not orthonormal");
  for (int i = 0; i < kArmDof; ++i) {
    const auto& j = arm.joints[i];
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      throw ModelError("joint " + std::to_string(i + 1) + " axis is not a unit vector");
    if (!(j.lower < j.upper))
      throw ModelError("joint " + std::to_string(i + 1) + " has lower limit >= upper limit");
  }
}

struct DualArm {
  ArmModel left;
  ArmModel right;
  JointConfig home_left = JointConfig::Zero();
  JointConfig home_right = JointConfig::Zero();

  const ArmModel& arm(ArmId id) const { return id == ArmId::Left ? left : right; }
  const JointConfig& home(ArmId id) const { return id == ArmId::Left ? home_left : home_right; }
};

inline void validate(const DualArm& robot) {
  validate(robot.left);
  validate(robot.right);
  if ((robot.left.base_pose.translation - robot.right.base_pose.translation).norm() < 1e-9)
    throw ModelError("left and right arm base poses coincide");
}

/// World frames of every joint (after its rotation), the flange and the TCP.
struct ArmFrames {
  std::array<Pose, kArmDof> joints;
  Pose flange;
  Pose tcp;

  Vec3 joint_axis(const ArmModel& arm, int i) const { return joints[i].rotation * arm.joints[i].axis; }
};

inline ArmFrames fk_frames(const ArmModel& arm, const JointConfig& q) {
  ArmFrames out;
  Pose t = arm.base_pose;
  for (int i = 0; i < kArmDof; ++i) {
    const auto& j = arm.joints[i];
    t.translation += t.rotation * j.origin;
    t.rotation = t.rotation * axis_angle(j.axis, q[i]);
    out.joints[i] = t;
  }
  out.flange = compose(t, arm.last_joint_to_flange);
  out.tcp = compose(out.flange, arm.flange_to_tcp);
  return out;
}

inline Pose fk(const ArmModel& arm, const JointConfig& q) { return fk_frames(arm, q).tcp; }

/// Geometric Jacobian of an arbitrary point rigidly attached to the last link.
/// Rows 0-2: linear velocity (m/rad); rows 3-5: angular velocity (rad/rad).
inline Jacobian jacobian_at_point(const ArmModel& arm, const ArmFrames& frames, const Vec3& point) {
  Jacobian jac;
  for (int i = 0; i < kArmDof; ++i) {
    const Vec3 w = frames.joint_axis(arm, i);
    jac.block<3, 1>(0, i) = w.cross(point - frames.joints[i].translation);
    jac.block<3, 1>(3, i) = w;
  }
  return jac;
}

inline Jacobian jacobian(const ArmModel& arm, const JointConfig& q) {
  const ArmFrames frames = fk_frames(arm, q);
  return jacobian_at_point(arm, frames, frames.tcp.translation);
}

/// Position error and rotation-vector error of the TCP relative to a target.
inline Vec6 pose_error(const Pose& current, const Pose& target) {
  Vec6 e;
  e.head<3>() = target.translation - current.translation;
  e.tail<3>() = rotation_vector(target.rotation * current.rotation.transpose());
  return e;
}

struct IkOptions {
  int max_iters = 200;
  int restarts = 8;           // total attempts: the caller's seed, then random restarts
  double damping = 0.05;
  double step_clamp = 0.2;    // rad, max per-iteration joint change
  double pos_tol = 1e-4;      // m
  double ori_tol = 1e-3;      // rad
  std::uint64_t seed = 0;
};

namespace detail {

// Single damped-least-squares descent from q. Returns the converged config
// or nullopt if tolerances were not met within max_iters.
inline std::optional<JointConfig> dls_descent(const ArmModel& arm, const Pose& target, JointConfig q,
                                              const IkOptions& opts) {
  const double lambda2 = opts.damping * opts.damping;
  // Iterate past the acceptance tolerance so returned solutions sit well inside it.
  const double pos_goal = opts.pos_tol * 1e-2;
  const double ori_goal = opts.ori_tol * 1e-2;
  constexpr int kStallWindow = 25;
  constexpr double kDampingFadeSq = 1e-2;
  constexpr double kMinDampingSq = 1e-6;
  double best = std::numeric_limits<double>::infinity();
  int best_it = 0;
  for (int it = 0; it <= opts.max_iters; ++it) {
    const ArmFrames frames = fk_frames(arm, q);
    const Vec6 e = pose_error(frames.tcp, target);
    const double pe = e.head<3>().norm();
    const double oe = e.tail<3>().norm();
    const bool converged = pe <= pos_goal && oe <= ori_goal;
    // A local minimum (often against a joint limit) stops improving.
    const double err = pe + 0.1 * oe;
    if (err < 0.99 * best) {
      best = err;
      best_it = it;
    }
    const bool stalled = it - best_it > kStallWindow;
    if (converged || stalled || it == opts.max_iters) {
      if (pe <= opts.pos_tol && oe <= opts.ori_tol) return q;
      return std::nullopt;
    }
    const Jacobian jac = jacobian_at_point(arm, frames, frames.tcp.translation);
    // Full damping far from the target, fading out close to it.
    const double scale = std::min(1.0, e.squaredNorm() / kDampingFadeSq);
    const Mat6 jjt = jac * jac.transpose() + (lambda2 * scale + kMinDampingSq) * Mat6::Identity();
    JointConfig dq = jac.transpose() * jjt.ldlt().solve(e);
    const double m = dq.cwiseAbs().maxCoeff();
    if (m > opts.step_clamp) dq *= opts.step_clamp / m;
    q = arm.clamp(q + dq);
  }
  return std::nullopt;
}

}  // namespace detail

using IkAccept = std::function<bool(const JointConfig&)>;

/// Damped-least-squares IK with seeded random restarts. The first attempt
/// starts from `seed`; each later attempt starts from the best (by pose
/// error) of a few random draws around the joint-range middles. `accept` may veto converged solutions (e.g. colliding
/// ones), in which case the search continues with the next restart.
inline std::optional<JointConfig> ik(const ArmModel& arm, const Pose& target, const JointConfig& seed,
                                     const IkOptions& opts, const IkAccept& accept = {}) {
  constexpr int kRestartDraws = 8;
  constexpr double kRestartOriWeight = 0.3;
  Rng rng(opts.seed);
  for (int attempt = 0; attempt < opts.restarts; ++attempt) {
    JointConfig start;
    if (attempt == 0) {
      start = arm.clamp(seed);
    } else {
      // Best of a few random draws: cheap to evaluate, and it avoids
      // starting far from the target in orientation.
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < kRestartDraws; ++k) {
        JointConfig cand;
        for (int i = 0; i < kArmDof; ++i) {
          // One turn around the middle of the range is enough; wide ranges
          // would otherwise start many descents against a limit.
          const auto& j = arm.joints[i];
          const double mid = 0.5 * (j.lower + j.upper);
          cand[i] = rng.uniform(std::max(j.lower, mid - kPi), std::min(j.upper, mid + kPi));
        }
        const Vec6 e = pose_error(fk(arm, cand), target);
        const double err = e.head<3>().norm() + kRestartOriWeight * e.tail<3>().norm();
        if (err < best) {
          best = err;
          start = cand;
        }
      }
    }
    if (auto q = detail::dls_descent(arm, target, start, opts)) {
      if (!accept || accept(*q)) return q;
    }
  }
  return std::nullopt;
}

/// The 6-DOF UR3-like arm used by the default scene. The arm stands upright
/// at zero configuration; the TCP approach axis (z) points along flange +y.
inline ArmModel ur3_arm(const Pose& base) {
  ArmModel arm;
  arm.base_pose = base;
  const Vec3 z = Vec3::UnitZ(), y = Vec3::UnitY();
  const double lim = 2.0 * kPi;
  arm.joints[0] = {z, {0.0, 0.0, 0.1519}, -lim, lim};
  arm.joints[1] = {y, {0.0, 0.1198, 0.0}, -lim, lim};
  arm.joints[2] = {y, {0.0, -0.0925, 0.24365}, -kPi, kPi};
  arm.joints[3] = {y, {0.0, 0.0, 0.21325}, -lim, lim};
  arm.joints[4] = {z, {0.0, 0.08505, 0.0}, -lim, lim};
  arm.joints[5] = {y, {0.0, 0.0, 0.08535}, -lim, lim};
  arm.last_joint_to_flange = {Rot3::Identity(), {0.0, 0.0819, 0.0}};
  arm.flange_to_tcp = {rot_x(-kPi / 2), {0.0, 0.12, 0.0}};
  return arm;
}

}  // namespace tetherplan
