/**
 * @file cable_constraint.hpp
 * @brief Cable bend-angle constraint for a tool hanging from a tool balancer.
 *
 * The balancer pulls the cable taut, so the cable is modelled as the straight
 * segment from the balancer outlet to the tool's connector point. The bend
 * angle is the angle between the balancer reference direction (world) and
 * the connector direction carried by the tool's current orientation.
 */

#pragma once

#include "tetherplan/collision.hpp"
#include "tetherplan/geometry.hpp"

#include <string>
#include <vector>

namespace tetherplan {

class CableError : public Error {
public:
  using Error::Error;
};

struct BalancerSpec {
  Vec3 anchor = Vec3::Zero();               // cable outlet, world (m)
  Vec3 reference_dir = Vec3::UnitZ();       // unit, world
  double max_load = 2.0;                    // kg
  double cable_radius = 0.01;               // m
};

/// Graspable cylindrical handle, tool frame.
struct Handle {
  Vec3 from = Vec3::Zero();
  Vec3 to = Vec3::Zero();
  double radius = 0.02;

  double length() const { return (to - from).norm(); }
};

struct ToolSpec {
  Vec3 connector_dir = Vec3::UnitZ();       // unit, tool frame: direction towards the connector
  Vec3 connector_point = Vec3::Zero();      // tool frame (m)
  std::vector<NamedShape> shapes;           // tool frame
  Handle handle;
};

struct BendConstraint {
  double theta_max = deg2rad(95.0);
};

inline void validate(const BalancerSpec& b) {
  if (std::abs(b.reference_dir.norm() - 1.0) > 1e-9) throw CableError("balancer reference_dir must be a unit vector");
  if (!(b.max_load > 0.0)) throw CableError("balancer max_load must be positive");
  if (!(b.cable_radius > 0.0)) throw CableError("balancer cable_radius must be positive");
}

inline void validate(const ToolSpec& t) {
  if (std::abs(t.connector_dir.norm() - 1.0) > 1e-9) throw CableError("tool connector_dir must be a unit vector");
}

inline void validate(const BendConstraint& c) {
  if (!(c.theta_max > 0.0 && c.theta_max <= kPi)) throw CableError("theta_max must lie in (0, 180] degrees");
}

inline double bend_angle(const Pose& tool_pose, const ToolSpec& tool, const BalancerSpec& balancer) {
  return angle_between(balancer.reference_dir, rotate(tool_pose.rotation, tool.connector_dir));
}

struct BendCheck {
  bool pass = true;
  double theta = 0.0;

  explicit operator bool() const { return pass; }
};

/// The constraint demands theta strictly below theta_max; theta == theta_max fails.
inline BendCheck check_bend(double theta, const BendConstraint& c) { return {theta < c.theta_max, theta}; }

inline BendCheck check_bend(const Pose& tool_pose, const ToolSpec& tool, const BalancerSpec& balancer,
                            const BendConstraint& c) {
  return check_bend(bend_angle(tool_pose, tool, balancer), c);
}

inline Vec3 connector_world(const Pose& tool_pose, const ToolSpec& tool) {
  return tool_pose.apply(tool.connector_point);
}

inline Capsule cable_capsule(const Pose& tool_pose, const ToolSpec& tool, const BalancerSpec& balancer) {
  const Vec3 end = connector_world(tool_pose, tool);
  if ((end - balancer.anchor).norm() < 1e-9) throw CableError("DegenerateCable: anchor coincides with connector point");
  return {balancer.anchor, end, balancer.cable_radius};
}

}  // namespace tetherplan
