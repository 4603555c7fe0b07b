#pragma once

#include "tetherplan/cable_constraint.hpp"
#include "tetherplan/planner_types.hpp"
#include "tetherplan/robot_model.hpp"
#include "tetherplan/scene.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

namespace tetherplan {

inline constexpr double kGravity = 9.81;

class EmptyTraceError : public Error {
public:
  EmptyTraceError() : Error("EmptyTrace: a torque trace has no holding waypoints") {}
};

/// Constant-force retractor: the balancer always pulls with its rated load.
inline double cable_tension(const BalancerSpec& b) {
  if (!(b.max_load > 0.0)) throw CableError("balancer max_load must be positive");
  return b.max_load * kGravity;
}

/// Pure force applied at the connector point (no moment: ball-joint attachment).
struct CableWrench {
  Vec3 force = Vec3::Zero();              // N, connector -> anchor
  Vec3 application_point = Vec3::Zero();  // world, m
};

inline CableWrench cable_wrench(const Pose& tool_pose, const ToolSpec& tool, const BalancerSpec& b) {
  const Capsule c = cable_capsule(tool_pose, tool, b);
  CableWrench w;
  w.application_point = c.b;
  w.force = cable_tension(b) * (c.a - c.b).normalized();
  return w;
}

/// tau = J_v(p)^T f, with J_v the linear Jacobian of the application point.
/// The point is treated as rigidly attached to the last link of `arm`.
inline JointConfig joint_torques(const ArmModel& arm, const JointConfig& q, const CableWrench& w) {
  const ArmFrames frames = fk_frames(arm, q);
  const Jacobian jac = jacobian_at_point(arm, frames, w.application_point);
  return jac.topRows<3>().transpose() * w.force;
}

/// Per-waypoint cable torques for every arm holding the tool there.
struct TorqueTrace {
  struct Row {
    std::array<std::optional<JointConfig>, 2> tau;
    const std::optional<JointConfig>& of(ArmId a) const { return tau[static_cast<int>(a)]; }
  };
  std::vector<Row> rows;  // one per plan waypoint

  std::size_t size() const { return rows.size(); }
  bool has_entries() const {
    return std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.tau[0] || r.tau[1]; });
  }
  /// Max over holding waypoints of max_i |tau_i|; nullopt if the arm never holds.
  std::optional<double> max_torque(ArmId a) const {
    std::optional<double> m;
    for (const auto& r : rows) {
      if (const auto& t = r.of(a)) m = std::max(m.value_or(0.0), t->cwiseAbs().maxCoeff());
    }
    return m;
  }
};

inline TorqueTrace trace_plan(const MotionPlan& plan, const DualArm& robot, const ToolSpec& tool,
                              const BalancerSpec& balancer) {
  TorqueTrace out;
  out.rows.resize(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Waypoint& w = plan.waypoints[i];
    if (w.holding.empty()) continue;
    const CableWrench wrench = cable_wrench(w.object_pose, tool, balancer);
    for (ArmId a : {ArmId::Left, ArmId::Right}) {
      if (w.holding.holds(a)) out.rows[i].tau[static_cast<int>(a)] = joint_torques(robot.arm(a), w.q(a), wrench);
    }
  }
  return out;
}

inline TorqueTrace trace_plan(const MotionPlan& plan, const Scene& scene) {
  return trace_plan(plan, scene.robot, scene.tool, scene.balancer);
}

/// Per-arm reduction of trace `a` relative to `b`: 100 (max_b - max_a) / max_b.
/// nullopt for an arm that does not hold the tool in both traces.
struct TorqueComparison {
  std::array<std::optional<double>, 2> reduction_pct;
  std::array<std::optional<double>, 2> max_a;
  std::array<std::optional<double>, 2> max_b;
  const std::optional<double>& of(ArmId arm) const { return reduction_pct[static_cast<int>(arm)]; }
};

inline TorqueComparison compare_max_torque(const TorqueTrace& a, const TorqueTrace& b) {
  if (!a.has_entries() || !b.has_entries()) throw EmptyTraceError();
  TorqueComparison out;
  for (ArmId arm : {ArmId::Left, ArmId::Right}) {
    const int i = static_cast<int>(arm);
    out.max_a[i] = a.max_torque(arm);
    out.max_b[i] = b.max_torque(arm);
    if (out.max_a[i] && out.max_b[i] && *out.max_b[i] > 0.0)
      out.reduction_pct[i] = 100.0 * (*out.max_b[i] - *out.max_a[i]) / *out.max_b[i];
  }
  return out;
}

}  // namespace tetherplan
