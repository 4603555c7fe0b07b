#pragma once

#include "tetherplan/cable_constraint.hpp"
#include "tetherplan/collision.hpp"
#include "tetherplan/planner_types.hpp"
#include "tetherplan/robot_model.hpp"

#include <string>
#include <vector>

namespace tetherplan {

class ValidationError : public Error {
public:
  using Error::Error;
};

/// Everything a planning task needs: robot, collision world, balancer, tool,
/// baseline start/goal tool poses and planner defaults.
struct Scene {
  DualArm robot;
  CollisionWorld world;
  BalancerSpec balancer;
  ToolSpec tool;
  Pose start_pose;
  Pose goal_pose;
  PlannerOptions planner;
};

/// Baseline start pose rotated by `roll` about the tool x axis.
inline Pose start_with_roll(const Scene& s, double roll) {
  return {s.start_pose.rotation * rot_x(roll), s.start_pose.translation};
}

/// Baseline goal pose rotated by `pitch` about the tool y axis.
inline Pose goal_with_pitch(const Scene& s, double pitch) {
  return {s.goal_pose.rotation * rot_y(pitch), s.goal_pose.translation};
}

/// Tool-frame rpy offsets (radians) applied to a baseline pose.
inline Pose offset_pose(const Pose& base, const Vec3& rpy) {
  return {base.rotation * rpy_to_rot(rpy.x(), rpy.y(), rpy.z()), base.translation};
}

/// The pre-grasp cable obstacle: straight segment from the balancer to the
/// connector of the tool at its (untouched) start pose.
inline Capsule static_cable(const Scene& s, const Pose& start) { return cable_capsule(start, s.tool, s.balancer); }

inline void validate(const Scene& s) {
  try {
    validate(s.robot);
    validate(s.balancer);
    validate(s.tool);
    validate(s.planner.bend);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  if (!is_orthonormal(s.start_pose.rotation) || !is_orthonormal(s.goal_pose.rotation))
    throw ValidationError("task poses must have orthonormal rotations");
  const double theta0 = bend_angle(s.start_pose, s.tool, s.balancer);
  if (theta0 > 1e-6)
    throw ValidationError("task.start: baseline start pose must hang straight (bend angle " +
                          std::to_string(rad2deg(theta0)) + " deg)");
  if ((connector_world(s.start_pose, s.tool) - s.balancer.anchor).norm() < 1e-9)
    throw ValidationError("balancer.anchor coincides with the start connector point");
  const auto& p = s.planner;
  if (!(p.step > 0.0)) throw ValidationError("planner.step_rad must be positive");
  if (p.max_edges <= 0) throw ValidationError("planner.max_edges must be positive");
  if (!(p.time_limit_s > 0.0)) throw ValidationError("planner.time_limit_s must be positive");
  if (p.axial_samples <= 0 || p.rotation_samples <= 0) throw ValidationError("planner grasp sample counts must be positive");
  if (!(p.finger_width > 0.0)) throw ValidationError("planner.finger_width must be positive");
  if (!(p.pregrasp_offset >= 0.0)) throw ValidationError("planner.pregrasp_offset must be non-negative");
  if (p.max_handovers < 0) throw ValidationError("planner.max_handovers must be non-negative");
  if (p.ik.max_iters <= 0 || p.ik.restarts <= 0) throw ValidationError("planner.ik iteration counts must be positive");
}

}  // namespace tetherplan
